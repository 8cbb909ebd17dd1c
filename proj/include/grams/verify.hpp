#pragma once

// Named machine-checkable properties behind the `verify` subcommand. Each
// check samples seeded random inputs, measures the worst signed violation of
// one inequality or identity, and passes iff that worst case stays under a
// tolerance pinned here.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "grams/analysis.hpp"
#include "grams/config.hpp"
#include "grams/hamiltonian.hpp"
#include "grams/objectives.hpp"
#include "grams/optim.hpp"
#include "grams/rng.hpp"
#include "grams/runner.hpp"

namespace grams {

struct CheckResult {
  std::string name;
  long samples = 0;
  double max_violation = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  std::uint64_t seed = 42;
  long trials = 10000;              // sample count for the battery-style checks
  bool sabotage_grams_sign = false; // flip the sign-magnitude step to prove non-vacuity
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass = true;
};

namespace detail {

inline CheckResult make_check(std::string name, long samples, double max_violation,
                              double tolerance) {
  CheckResult c;
  c.name = std::move(name);
  c.samples = samples;
  c.max_violation = max_violation;
  c.pass = max_violation <= tolerance;
  return c;
}

struct SampledState {
  Vec w;
  MomentState st;
};

// Weights uniform on a box, moments gaussian, second moments strictly
// positive, step counter mid-run.
inline SampledState sample_state(SplitMix64& rng, std::size_t dim, double w_range = 2.0) {
  SampledState s;
  s.w.resize(dim);
  for (double& x : s.w) x = rng.uniform(-w_range, w_range);
  s.st = make_state(dim);
  for (double& x : s.st.m) x = 0.5 * rng.gaussian();
  for (double& x : s.st.v) {
    const double r = 0.3 * rng.gaussian();
    x = r * r;
  }
  s.st.t = static_cast<long>(1 + rng.next_u64() % 30);
  return s;
}

inline HyperParams plain_hypers(double eta) {
  HyperParams hp;
  hp.eta_base = eta;
  hp.schedule = Schedule::constant;
  hp.weight_decay = 0.0;
  return hp;
}

inline double log_uniform(SplitMix64& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

inline bool bits_equal(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  return true;
}

}  // namespace detail

// ---- fact battery ---------------------------------------------------------

inline void append_fact_checks(std::vector<CheckResult>& out, std::uint64_t seed, long trials) {
  const FactReport rep = fact_battery(seed, trials);
  const double tol = 1e-12;
  out.push_back(detail::make_check("facts.rearrange", trials, rep.rearrange, tol));
  out.push_back(detail::make_check("facts.sign_abs_pair", trials, rep.signed_abs_pair, tol));
  out.push_back(detail::make_check("facts.dot_abs_bound", trials, rep.dot_abs_gap, tol));
  out.push_back(detail::make_check("facts.masked_bound", trials, rep.masked_gap, tol));
  out.push_back(detail::make_check("facts.scalar_sign", trials, rep.scalar_sign, tol));
  out.push_back(detail::make_check("facts.vector_sign", trials, rep.vector_sign, tol));
}

// ---- gradient and objective regularity checks ------------------------------

inline CheckResult check_gradients(const std::string& name, const Objective& obj,
                                   std::uint64_t seed, double w_scale) {
  SplitMix64 rng(seed);
  const long points = 20;
  double worst = 0.0;
  for (long i = 0; i < points; ++i) {
    Vec w(obj.dim);
    for (double& x : w) x = w_scale * rng.gaussian();
    worst = std::max(worst, grad_check(obj, w, 1e-6));
  }
  return detail::make_check("grad." + name, points, worst, 1e-5);
}

inline CheckResult check_pl_pointwise(const std::string& name, const Objective& obj,
                                      std::uint64_t seed) {
  SplitMix64 rng(seed);
  const long points = 1000;
  double worst = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < points; ++i) {
    Vec w(obj.dim);
    for (double& x : w) x = rng.uniform(-3.0, 3.0);
    const double gap = obj.value(w) - *obj.f_star;
    worst = std::max(worst, 2.0 * *obj.mu * gap - norm_sq(obj.gradient(w)));
  }
  return detail::make_check("objective.pl." + name, points, worst, 1e-12);
}

inline CheckResult check_smoothness(const std::string& name, const Objective& obj,
                                    std::uint64_t seed, double w_range) {
  SplitMix64 rng(seed);
  const long pairs = 1000;
  double worst = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < pairs; ++i) {
    Vec x(obj.dim), y(obj.dim);
    for (double& v : x) v = rng.uniform(-w_range, w_range);
    for (double& v : y) v = rng.uniform(-w_range, w_range);
    Vec gx = obj.gradient(x);
    const Vec gy = obj.gradient(y);
    for (std::size_t k = 0; k < gx.size(); ++k) gx[k] -= gy[k];
    worst = std::max(worst, norm(gx) - *obj.L * distance(x, y));
  }
  return detail::make_check("objective.smooth." + name, pairs, worst, 1e-9);
}

// ---- one-step descent checks -----------------------------------------------

// Measured loss change of one step must sit inside [lower, upper] from the
// descent bounds, for random states and random step sizes.
inline CheckResult check_sandwich(const std::string& name, const Objective& obj,
                                  std::uint64_t seed, bool cautious) {
  SplitMix64 rng(seed);
  const long states = 200;
  double worst = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < states; ++i) {
    const detail::SampledState s = detail::sample_state(rng, obj.dim);
    const double eta = detail::log_uniform(rng, 1e-3, 1.0);
    const HyperParams hp = detail::plain_hypers(eta);
    const Vec g = obj.gradient(s.w);
    const AdamPipeline p = adam_pipeline(g, s.st, hp);
    StepResult step = cautious ? cautious_adam_step(s.w, g, s.st, hp, ScaleMode::definition)
                               : grams_step(s.w, g, s.st, hp);
    const DescentBounds b = cautious ? cautious_descent_bounds(g, p.u, eta, *obj.L)
                                     : grams_descent_bounds(g, p.u, eta, *obj.L);
    const double dl = loss_delta(obj, s.w, step.new_weights);
    worst = std::max(worst, std::max(b.lower - dl, dl - b.upper));
  }
  const char* kind = cautious ? "cautious_sandwich." : "grams_sandwich.";
  return detail::make_check("descent." + std::string(kind) + name, states, worst, 1e-9);
}

// At exactly the safe step size the one-step guarantee is an equality in the
// worst case, so the measured change must be nonpositive up to rounding.
inline CheckResult check_safe_step(const std::string& name, const Objective& obj,
                                   std::uint64_t seed, bool cautious) {
  SplitMix64 rng(seed);
  const long states = 200;
  double worst = -std::numeric_limits<double>::infinity();
  long done = 0;
  while (done < states) {
    const detail::SampledState s = detail::sample_state(rng, obj.dim);
    HyperParams hp = detail::plain_hypers(1.0);
    const Vec g = obj.gradient(s.w);
    const AdamPipeline p = adam_pipeline(g, s.st, hp);
    const double eta =
        cautious ? safe_step_cautious(g, p.u, *obj.L) : safe_step_grams(g, p.u, *obj.L);
    if (!std::isfinite(eta)) continue;  // u == 0: the step moves nothing
    hp.eta_base = eta;
    const StepResult step = cautious ? cautious_adam_step(s.w, g, s.st, hp, ScaleMode::definition)
                                     : grams_step(s.w, g, s.st, hp);
    worst = std::max(worst, loss_delta(obj, s.w, step.new_weights));
    ++done;
  }
  const char* kind = cautious ? "cautious_safe_step." : "grams_safe_step.";
  return detail::make_check("descent." + std::string(kind) + name, states, worst, 1e-12);
}

// Comparison of the sign-magnitude step against the masked step on states
// with at least one misaligned coordinate, at the shared capped step size:
// the sign-magnitude step must descend at least as much, and the masked step
// must descend.
inline CheckResult check_comparison(std::uint64_t seed, const GramsStepFn& grams_fn) {
  SplitMix64 rng(seed);
  const long states = 500;
  double worst = -std::numeric_limits<double>::infinity();
  const Objective objs[2] = {toy2d(), diag_quadratic(Vec{1.0, 0.1, 0.01})};
  long done = 0;
  while (done < states) {
    const Objective& obj = objs[done % 2];
    const detail::SampledState s = detail::sample_state(rng, obj.dim);
    const HyperParams hp = detail::plain_hypers(0.05);
    const Vec g = obj.gradient(s.w);
    const AdamPipeline p = adam_pipeline(g, s.st, hp);
    bool misaligned = false;
    for (std::size_t k = 0; k < p.u.size(); ++k)
      if (p.u[k] * g[k] < 0.0) misaligned = true;
    if (!misaligned) continue;
    const ComparisonSample cs = one_step_comparison_with(grams_fn, obj, s.w, s.st, hp, *obj.L);
    worst = std::max(worst, std::max(cs.dl_grams - cs.dl_cautious, cs.dl_cautious));
    ++done;
  }
  return detail::make_check("descent.comparison", states, worst, 1e-12);
}

// ---- convergence envelope ---------------------------------------------------

inline CheckResult check_pl_envelope() {
  RunConfig cfg;
  cfg.kind = OptKind::grams;
  cfg.optimizer = "grams";
  cfg.objective = "toy2d";
  cfg.hp = detail::plain_hypers(0.01);
  cfg.steps = 1000;
  cfg.seed = 42;
  cfg.init_values = Vec{1.0, 1.0};
  const RunResult run = run_single(cfg);
  const ConvergenceReport rep = pl_envelope_check(run.trajectory, make_objective(cfg), cfg.hp.eta_base);
  CheckResult c = detail::make_check("conv.pl_envelope", cfg.steps, rep.final_gap - rep.bound, 0.0);
  c.pass = rep.holds && !run.summary.aborted;
  return c;
}

// ---- aligned-regime collapse ------------------------------------------------

// With the first moment a positive multiple of the gradient every coordinate
// is aligned, and the sign-magnitude, plain, and masked (definition-mode)
// steps must agree to the bit.
inline CheckResult check_aligned_equality(std::uint64_t seed) {
  SplitMix64 rng(seed);
  const long states = 200;
  long mismatched = 0;
  for (long i = 0; i < states; ++i) {
    const std::size_t dim = 1 + rng.next_u64() % 8;
    Vec w(dim), g(dim);
    MomentState st = make_state(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      w[k] = rng.uniform(-2.0, 2.0);
      g[k] = rng.uniform(-2.0, 2.0);
    }
    const double c = rng.uniform(0.1, 2.0);
    for (std::size_t k = 0; k < dim; ++k) {
      st.m[k] = c * g[k];
      const double r = 0.3 * rng.gaussian();
      st.v[k] = r * r;
    }
    st.t = static_cast<long>(1 + rng.next_u64() % 30);
    HyperParams hp = detail::plain_hypers(detail::log_uniform(rng, 1e-4, 0.1));
    if (i % 2 == 1) hp.weight_decay = 0.01;
    const StepResult a = adam_step(w, g, st, hp);
    const StepResult gr = grams_step(w, g, st, hp);
    const StepResult ca = cautious_adam_step(w, g, st, hp, ScaleMode::definition);
    const bool same = detail::bits_equal(a.new_weights, gr.new_weights) &&
                      detail::bits_equal(a.new_weights, ca.new_weights) &&
                      detail::bits_equal(a.update_direction, gr.update_direction) &&
                      detail::bits_equal(a.update_direction, ca.update_direction);
    if (!same) ++mismatched;
  }
  return detail::make_check("optim.aligned_equality", states, static_cast<double>(mismatched),
                            0.0);
}

// ---- continuous-time checks -------------------------------------------------

inline void append_ham_pointwise_checks(std::vector<CheckResult>& out, std::uint64_t seed,
                                        long trials) {
  SplitMix64 rng(seed);
  const Objective loss = diag_quadratic(Vec{0.5, 0.75, 0.25, 1.0});
  const double levels[3] = {0.0, 0.1, 1.0};
  HamiltonianSystem systems[9] = {
      make_system(loss, levels[0], levels[0]), make_system(loss, levels[0], levels[1]),
      make_system(loss, levels[0], levels[2]), make_system(loss, levels[1], levels[0]),
      make_system(loss, levels[1], levels[1]), make_system(loss, levels[1], levels[2]),
      make_system(loss, levels[2], levels[0]), make_system(loss, levels[2], levels[1]),
      make_system(loss, levels[2], levels[2])};

  const double neg_inf = -std::numeric_limits<double>::infinity();
  double worst_H = neg_inf, worst_vs_cautious = neg_inf, worst_vs_std = neg_inf;
  double worst_masked = neg_inf, worst_residual = 0.0;
  for (long i = 0; i < trials; ++i) {
    const HamiltonianSystem& sys = systems[i % 9];
    Vec w(4), s(4);
    for (double& x : w) x = rng.uniform(-3.0, 3.0);
    for (double& x : s) x = rng.uniform(-3.0, 3.0);
    if (rng.uniform() < 0.1) w[rng.next_u64() % 4] = 0.0;
    if (rng.uniform() < 0.1) s[rng.next_u64() % 4] = 0.0;

    const RateSample r = descent_rates(sys, w, s);
    worst_H = std::max(worst_H, r.delta_H_grams);
    worst_vs_cautious = std::max(worst_vs_cautious, r.delta_L_grams - r.delta_L_cautious);
    worst_vs_std = std::max(worst_vs_std, r.delta_L_grams + r.delta_L_std);
    worst_residual = std::max(worst_residual, r.drift_residual);

    const Vec gl = sys.loss.gradient(w);
    const Vec gk = sys.kinetic.gradient(s);
    long double plain = 0.0L, absdot = 0.0L, off = 0.0L;
    for (std::size_t k = 0; k < gl.size(); ++k) {
      const long double prod = static_cast<long double>(gl[k]) * gk[k];
      plain += prod;
      absdot += fabsl(prod);
      if (!(prod > 0.0L)) off += prod;
    }
    worst_masked = std::max(worst_masked, static_cast<double>(plain - absdot - off));
  }
  out.push_back(detail::make_check("ham.rate_grams_H", trials, worst_H, 1e-12));
  out.push_back(detail::make_check("ham.rate_grams_vs_cautious", trials, worst_vs_cautious, 1e-12));
  out.push_back(detail::make_check("ham.rate_grams_vs_standard", trials, worst_vs_std, 1e-12));
  out.push_back(detail::make_check("ham.masked_fact", trials, worst_masked, 1e-12));
  out.push_back(detail::make_check("ham.drift_consistency", trials, worst_residual, 1e-10));
}

inline CheckResult check_ham_conservation() {
  HamConfig cfg;
  cfg.variant = HamVariant::standard;
  const HamResult res = run_ham(cfg);
  CheckResult c = detail::make_check("ham.conservation", cfg.steps, res.max_abs_drift, 1e-8);
  if (res.trajectory.aborted) c.pass = false;
  return c;
}

inline CheckResult check_ham_grams_monotone() {
  HamConfig cfg;
  cfg.variant = HamVariant::grams;
  cfg.a = 0.1;
  cfg.b = 0.1;
  const HamResult res = run_ham(cfg);
  CheckResult c = detail::make_check("ham.grams_monotone", cfg.steps, res.max_step_increase, 1e-8);
  if (res.trajectory.aborted || res.final_H > res.initial_H) c.pass = false;
  return c;
}

// ---- driver -----------------------------------------------------------------

inline GramsStepFn make_grams_step_fn(bool sabotage_sign) {
  if (!sabotage_sign)
    return [](const Vec& w, const Vec& g, const MomentState& st, const HyperParams& hp) {
      return grams_step(w, g, st, hp);
    };
  // Deliberately broken stepper: same magnitudes, opposite signs. Exists so a
  // passing report demonstrably depends on the real update rule.
  return [](const Vec& w, const Vec& g, const MomentState& st, const HyperParams& hp) {
    StepResult r = grams_step(w, g, st, hp);
    for (std::size_t i = 0; i < w.size(); ++i) {
      r.update_direction[i] = -r.update_direction[i];
      r.new_weights[i] = w[i] + r.update_direction[i];
    }
    return r;
  };
}

inline VerifyReport run_verify(const VerifyOptions& opts) {
  if (opts.trials < 1) throw ConfigError("verify: trials must be >= 1");
  VerifyReport rep;
  std::vector<CheckResult>& cs = rep.checks;
  const std::uint64_t seed = opts.seed;

  append_fact_checks(cs, seed, opts.trials);

  cs.push_back(check_gradients("toy2d", toy2d(), seed + 1, 1.0));
  cs.push_back(check_gradients("diag_quadratic", diag_quadratic(Vec{1.0, 0.1, 0.01}), seed + 2, 1.0));
  cs.push_back(check_gradients("rosenbrock", rosenbrock(), seed + 3, 1.0));
  cs.push_back(check_gradients("logreg", logistic_regression(seed, 64, 4), seed + 4, 0.7));
  cs.push_back(check_gradients("mlp", tiny_mlp(seed, 4), seed + 5, 0.5));

  cs.push_back(check_pl_pointwise("toy2d", toy2d(), seed + 6));
  cs.push_back(check_pl_pointwise("diag_quadratic", diag_quadratic(Vec{1.0, 0.1, 0.01}), seed + 7));
  cs.push_back(check_smoothness("toy2d", toy2d(), seed + 8, 3.0));
  cs.push_back(check_smoothness("diag_quadratic", diag_quadratic(Vec{1.0, 0.1, 0.01}), seed + 9, 3.0));
  cs.push_back(check_smoothness("logreg", logistic_regression(seed, 64, 4), seed + 10, 2.0));

  const Objective known_L[3] = {toy2d(), diag_quadratic(Vec{1.0, 0.1, 0.01}),
                                logistic_regression(seed, 64, 4)};
  const char* known_L_names[3] = {"toy2d", "diag_quadratic", "logreg"};
  for (int i = 0; i < 3; ++i) {
    cs.push_back(check_sandwich(known_L_names[i], known_L[i], seed + 11 + i, false));
    cs.push_back(check_sandwich(known_L_names[i], known_L[i], seed + 14 + i, true));
  }
  for (int i = 0; i < 2; ++i) {
    cs.push_back(check_safe_step(known_L_names[i], known_L[i], seed + 17 + i, false));
    cs.push_back(check_safe_step(known_L_names[i], known_L[i], seed + 19 + i, true));
  }

  cs.push_back(check_comparison(seed + 21, make_grams_step_fn(opts.sabotage_grams_sign)));
  cs.push_back(check_pl_envelope());
  cs.push_back(check_aligned_equality(seed + 22));

  append_ham_pointwise_checks(cs, seed + 23, opts.trials);
  cs.push_back(check_ham_conservation());
  cs.push_back(check_ham_grams_monotone());

  for (const CheckResult& c : cs) rep.all_pass = rep.all_pass && c.pass;
  return rep;
}

inline void print_verify(const VerifyReport& rep, std::ostream& os) {
  long failed = 0;
  for (const CheckResult& c : rep.checks) {
    os << "check " << c.name << " samples=" << c.samples << " max_violation=" << c.max_violation
       << (c.pass ? " PASS" : " FAIL") << "\n";
    if (!c.pass) ++failed;
  }
  if (rep.all_pass)
    os << "verify: all " << rep.checks.size() << " checks passed\n";
  else
    os << "verify: " << failed << " of " << rep.checks.size() << " checks FAILED\n";
}

}  // namespace grams
