#pragma once

// One-step descent analysis for the sign-magnitude and masked update rules:
// two-sided bounds on the loss change, safe step-size thresholds, the shared
// algebraic fact battery, a direct grams-vs-cautious comparison, and the
// PL convergence envelope over a logged trajectory.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "grams/objectives.hpp"
#include "grams/optim.hpp"
#include "grams/rng.hpp"
#include "grams/trajectory.hpp"
#include "grams/vec.hpp"

namespace grams {

inline double loss_delta(const Objective& obj, const Vec& w, const Vec& w_next) {
  require_same_size(w, w_next);
  return obj.value(w_next) - obj.value(w);
}

// <u o g, 1_{u o g >= 0}>: the aligned share of the update/gradient product.
inline double masked_alignment(const Vec& u, const Vec& g) {
  require_same_size(u, g);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double p = u[i] * g[i];
    if (p >= 0.0) s += p;
  }
  return s;
}

// sum over misaligned coordinates of |u_i| |g_i| (absolute magnitudes).
inline double misaligned_mass(const Vec& u, const Vec& g) {
  require_same_size(u, g);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] * g[i] < 0.0) s += std::fabs(u[i]) * std::fabs(g[i]);
  return s;
}

struct DescentBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Bounds on the one-step loss change of a sign-magnitude step of size eta on
// an L-smooth objective: upper from smoothness, lower from convexity of the
// objective (all built-in objectives with known L are convex).
inline DescentBounds grams_descent_bounds(const Vec& g, const Vec& u, double eta, double L) {
  require_same_size(g, u);
  const double lower = -eta * dot_abs(g, u);
  return DescentBounds{lower, lower + 0.5 * L * eta * eta * norm_sq(u)};
}

inline DescentBounds cautious_descent_bounds(const Vec& g, const Vec& u, double eta, double L) {
  const double lower = -eta * masked_alignment(u, g);
  return DescentBounds{lower, lower + 0.5 * L * eta * eta * norm_sq(u)};
}

// Largest step size with a one-step descent guarantee. u = 0 means the step
// moves nothing, so any rate is safe; callers get +inf as the sentinel.
inline double safe_step_grams(const Vec& g, const Vec& u, double L) {
  require_same_size(g, u);
  const double usq = norm_sq(u);
  if (usq == 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * dot_abs(g, u) / (L * usq);
}

inline double safe_step_cautious(const Vec& g, const Vec& u, double L) {
  const double usq = norm_sq(u);
  if (usq == 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * masked_alignment(u, g) / (L * usq);
}

// Threshold under which the sign-magnitude step descends at least as fast as
// the masked step. The misaligned term uses absolute magnitudes; a fully
// aligned state returns 0, the regime where both updates coincide exactly.
inline double safe_step_compare(const Vec& g, const Vec& u, double L) {
  const double usq = norm_sq(u);
  if (usq == 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * std::min(masked_alignment(u, g), misaligned_mass(u, g)) / (L * usq);
}

// Max violation per algebraic fact over seeded random tuples (entries uniform
// in [-10,10], dims 1..64, zeros injected). Identities report |lhs - rhs|;
// the two one-sided facts report the largest signed excess, which stays
// negative when the fact holds with margin. Dot products accumulate in long
// double: the rearrangement identity evaluated in plain double can round to
// within an order of magnitude of the 1e-12 gate.
struct FactReport {
  double rearrange = 0.0;        // <a, b o c> vs <a o b, c>
  double signed_abs_pair = 0.0;  // <a, -sign(a) o |b|> vs -<|a|, |b|>
  double dot_abs_gap = 0.0;      // <a, b> - <|a|, |b|>            (<= 0)
  double masked_gap = 0.0;       // above minus <a o b, 1 - 1_{>0}> (<= 0)
  double scalar_sign = 0.0;      // a * sign(a) vs |a|
  double vector_sign = 0.0;      // a o sign(a) vs |a| elementwise
};

inline FactReport fact_battery(std::uint64_t seed, long n_trials) {
  if (n_trials < 1) throw std::invalid_argument("fact_battery: n_trials must be >= 1");
  SplitMix64 rng(seed);
  FactReport rep;
  rep.dot_abs_gap = -std::numeric_limits<double>::infinity();
  rep.masked_gap = -std::numeric_limits<double>::infinity();
  for (long trial = 0; trial < n_trials; ++trial) {
    const std::size_t dim = 1 + static_cast<std::size_t>(rng.next_u64() % 64);
    Vec a(dim), b(dim), c(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      a[i] = rng.uniform(-10.0, 10.0);
      b[i] = rng.uniform(-10.0, 10.0);
      c[i] = rng.uniform(-10.0, 10.0);
      if (rng.uniform() < 0.08) a[i] = 0.0;
      if (rng.uniform() < 0.08) b[i] = 0.0;
      if (rng.uniform() < 0.08) c[i] = 0.0;
    }
    long double a_bc = 0.0L, ab_c = 0.0L, signed_pair = 0.0L;
    long double plain = 0.0L, absdot = 0.0L, masked_off = 0.0L;
    for (std::size_t i = 0; i < dim; ++i) {
      const long double la = a[i], lb = b[i], lc = c[i];
      a_bc += la * (lb * lc);
      ab_c += (la * lb) * lc;
      signed_pair += la * (-static_cast<long double>(sign_of(a[i])) * std::fabs(b[i]));
      const long double p = la * lb;
      plain += p;
      absdot += std::fabs(a[i]) * static_cast<long double>(std::fabs(b[i]));
      if (!(p > 0.0L)) masked_off += p;
      rep.scalar_sign =
          std::max(rep.scalar_sign, std::fabs(a[i] * sign_of(a[i]) - std::fabs(a[i])));
    }
    rep.rearrange = std::max(rep.rearrange, static_cast<double>(std::fabs(a_bc - ab_c)));
    rep.signed_abs_pair =
        std::max(rep.signed_abs_pair, static_cast<double>(std::fabs(signed_pair + absdot)));
    rep.dot_abs_gap = std::max(rep.dot_abs_gap, static_cast<double>(plain - absdot));
    rep.masked_gap = std::max(rep.masked_gap, static_cast<double>(plain - absdot - masked_off));
    const Vec lhs = hadamard(a, sign_vec(a));
    const Vec rhs = abs_vec(a);
    for (std::size_t i = 0; i < dim; ++i)
      rep.vector_sign = std::max(rep.vector_sign, std::fabs(lhs[i] - rhs[i]));
  }
  return rep;
}

// Measured loss change of one grams step and one definition-mode cautious
// step from the same (w, state), with the rate capped at both comparison
// thresholds. A fully aligned state caps the rate at zero; both deltas are
// then zero and the sample carries eta_used = 0.
struct ComparisonSample {
  double dl_grams = 0.0;
  double dl_cautious = 0.0;
  double eta_used = 0.0;
};

using GramsStepFn =
    std::function<StepResult(const Vec&, const Vec&, const MomentState&, const HyperParams&)>;

inline ComparisonSample one_step_comparison_with(const GramsStepFn& grams_fn,
                                                 const Objective& obj, const Vec& w,
                                                 const MomentState& st, HyperParams hp,
                                                 double L) {
  const Vec g = obj.gradient(w);
  const AdamPipeline p = adam_pipeline(g, st, hp);
  double eta = hp.eta_base;
  const double cap_compare = safe_step_compare(g, p.u, L);
  const double cap_cautious = safe_step_cautious(g, p.u, L);
  if (std::isfinite(cap_compare)) eta = std::min(eta, cap_compare);
  if (std::isfinite(cap_cautious)) eta = std::min(eta, cap_cautious);
  if (eta <= 0.0) return ComparisonSample{};
  hp.eta_base = eta;
  hp.schedule = Schedule::constant;
  hp.weight_decay = 0.0;
  const StepResult gr = grams_fn(w, g, st, hp);
  const StepResult ca = cautious_adam_step(w, g, st, hp, ScaleMode::definition);
  return ComparisonSample{loss_delta(obj, w, gr.new_weights),
                          loss_delta(obj, w, ca.new_weights), eta};
}

inline ComparisonSample one_step_comparison(const Objective& obj, const Vec& w,
                                            const MomentState& st, const HyperParams& hp,
                                            double L) {
  return one_step_comparison_with(
      [](const Vec& w2, const Vec& g2, const MomentState& st2, const HyperParams& hp2) {
        return grams_step(w2, g2, st2, hp2);
      },
      obj, w, st, hp, L);
}

// Envelope check for the global convergence bound
//   loss(w_T) - f* <= 4 G (loss(w_1) - f*) / (mu eta T)
// with G taken as the observed supremum of the gradient norm along the
// trajectory. Observed G is a lower estimate of any admissible gradient
// bound, which makes `holds` a conservative verdict.
struct ConvergenceReport {
  long T = 0;
  double delta1 = 0.0;
  double G = 0.0;
  double mu = 0.0;
  double eta = 0.0;
  double bound = 0.0;
  double final_gap = 0.0;
  bool holds = false;
};

inline ConvergenceReport pl_envelope_check(const std::vector<TrajectoryRecord>& trajectory,
                                           const Objective& obj, double eta) {
  if (trajectory.empty()) throw std::invalid_argument("pl_envelope_check: empty trajectory");
  if (!obj.mu || !obj.f_star)
    throw std::invalid_argument("pl_envelope_check: objective lacks PL constants");
  ConvergenceReport r;
  r.T = static_cast<long>(trajectory.size());
  r.delta1 = trajectory.front().loss - *obj.f_star;
  for (const TrajectoryRecord& rec : trajectory) r.G = std::max(r.G, rec.grad_norm);
  r.mu = *obj.mu;
  r.eta = eta;
  r.bound = 4.0 * r.G * r.delta1 / (r.mu * eta * static_cast<double>(r.T));
  r.final_gap = trajectory.back().loss - *obj.f_star;
  r.holds = r.final_gap <= r.bound;
  return r;
}

}  // namespace grams
