#pragma once

// Experiment execution: a single configured run with trajectory logging, the
// five-optimizer comparison on the 2-d convex objective, and the damped
// Hamiltonian simulation behind the `ham` subcommand.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grams/analysis.hpp"
#include "grams/config.hpp"
#include "grams/hamiltonian.hpp"
#include "grams/objectives.hpp"
#include "grams/optim.hpp"
#include "grams/trajectory.hpp"
#include "grams/vec.hpp"

namespace grams {

struct RunResult {
  std::vector<TrajectoryRecord> trajectory;
  RunSummary summary;
  Vec final_weights;
};

// Cautious optimizers run with the algorithm-mode lr rescale here; the
// definition mode is reserved for the verification suites.
inline RunResult run_single(const RunConfig& cfg) {
  const Objective obj = make_objective(cfg);
  Vec w = resolve_init(cfg, obj);
  MomentState st = make_state(obj.dim);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  RunResult out;
  out.trajectory.reserve(static_cast<std::size_t>(cfg.steps));
  out.summary.optimizer = cfg.optimizer;
  out.summary.objective = cfg.objective;
  out.summary.min_loss = std::numeric_limits<double>::infinity();

  auto observe = [&](const Vec& weights, long completed_steps) {
    const double loss = obj.value(weights);
    if (loss < out.summary.min_loss) {
      out.summary.min_loss = loss;
      out.summary.argmin_step = completed_steps;
    }
    return loss;
  };

  for (long t = 1; t <= cfg.steps; ++t) {
    Vec g = obj.gradient(w);
    TrajectoryRecord rec;
    rec.step = t;
    rec.loss = observe(w, t - 1);
    rec.grad_norm = norm(g);
    rec.dist_to_opt = obj.w_star ? distance(w, *obj.w_star) : nan;
    if (cfg.grad_clip > 0.0) g = clip_global_norm(std::move(g), cfg.grad_clip);

    StepResult step;
    try {
      step = optimizer_step(cfg.kind, w, g, st, cfg.hp, ScaleMode::algorithm);
    } catch (const std::domain_error&) {
      out.summary.aborted = true;
      break;
    }
    rec.effective_lr = step.effective_lr;
    out.trajectory.push_back(rec);
    w = std::move(step.new_weights);
    st = std::move(step.new_state);
  }

  out.summary.final_loss = observe(w, static_cast<long>(out.trajectory.size()));
  out.summary.final_dist = obj.w_star ? distance(w, *obj.w_star) : nan;
  out.final_weights = std::move(w);
  return out;
}

struct CompareResult {
  std::vector<std::pair<std::string, RunResult>> runs;  // declared order
  bool ordering_ok = false;  // grams best on both final loss and final dist
};

inline RunConfig compare_config(const std::string& optimizer, double lr, const Vec& init,
                                long steps) {
  RunConfig cfg;
  cfg.kind = optimizer_from_name(optimizer);
  cfg.optimizer = optimizer;
  cfg.objective = "toy2d";
  cfg.hp.eta_base = lr;
  cfg.hp.beta1 = 0.9;
  cfg.hp.beta2 = lion_family(cfg.kind) ? 0.99 : 0.999;
  cfg.hp.epsilon = 1e-6;
  cfg.steps = steps;
  cfg.hp.total_steps = steps;
  cfg.seed = 42;
  cfg.init_values = init;
  return cfg;
}

// Five optimizers from the same start on the 2-d convex objective; the
// sign-family rates are 10x apart because the sign update has unit magnitude.
inline CompareResult compare_optimizers(const Vec& init, long steps) {
  if (init.size() != 2) throw ConfigError("compare: init must have 2 entries");
  if (steps < 1) throw ConfigError("compare: steps must be >= 1");
  const std::pair<std::string, double> plan[] = {
      {"grams", 0.01}, {"adam", 0.01}, {"cadam", 0.01}, {"lion", 0.001}, {"clion", 0.001}};
  CompareResult out;
  for (const auto& [name, lr] : plan)
    out.runs.emplace_back(name, run_single(compare_config(name, lr, init, steps)));
  const RunSummary& grams_summary = out.runs.front().second.summary;
  out.ordering_ok = true;
  for (std::size_t i = 1; i < out.runs.size(); ++i) {
    const RunSummary& other = out.runs[i].second.summary;
    if (grams_summary.final_loss > other.final_loss) out.ordering_ok = false;
    if (grams_summary.final_dist > other.final_dist) out.ordering_ok = false;
  }
  return out;
}

struct HamConfig {
  HamVariant variant = HamVariant::standard;
  double dt = 1e-3;
  long steps = 10000;
  double a = 0.0;
  double b = 0.0;
};

struct HamResult {
  HamTrajectory trajectory;
  HamiltonianSystem system;
  double initial_H = 0.0;
  double final_H = 0.0;
  double max_abs_drift = 0.0;      // max |H_n - H_0|
  double max_step_increase = 0.0;  // max (H_{n+1} - H_n)
  double final_loss = 0.0;
  double final_grad_H_norm = 0.0;  // ||(gL, gK)|| at the trajectory end
};

// Fixed 2-d quadratic loss 0.5*||w||^2 with the quadratic kinetic term and a
// frozen start, so runs are comparable across variants and damping levels.
inline HamResult run_ham(const HamConfig& cfg) {
  HamResult out{HamTrajectory{}, make_system(diag_quadratic(Vec{0.5, 0.5}), cfg.a, cfg.b)};
  const Vec w0{1.2, -0.8};
  const Vec s0{0.3, 0.5};
  out.trajectory = integrate_rk4(out.system, cfg.variant, w0, s0, cfg.dt, cfg.steps);

  const std::vector<HamRecord>& recs = out.trajectory.records;
  out.initial_H = recs.front().H;
  out.final_H = recs.back().H;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    out.max_abs_drift = std::max(out.max_abs_drift, std::fabs(recs[i].H - out.initial_H));
    if (i > 0)
      out.max_step_increase = std::max(out.max_step_increase, recs[i].H - recs[i - 1].H);
  }
  out.final_loss = recs.back().loss;
  const Vec gl = out.system.loss.gradient(recs.back().w);
  const Vec gk = out.system.kinetic.gradient(recs.back().s);
  out.final_grad_H_norm = std::sqrt(norm_sq(gl) + norm_sq(gk));
  return out;
}

}  // namespace grams
