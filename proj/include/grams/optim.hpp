#pragma once

// Discrete optimizer update rules over flat parameter vectors: adam/adamw,
// grams (direction from the gradient sign, magnitude from the adam update),
// lion, the cautious masked variants of adam and lion, and rmsprop.
//
// Every stepper is a pure function of (weights, gradient, state, hyperparams)
// and returns the new weights, the new state, the applied update term, and
// the learning rate actually used. Weight decay is decoupled and applied to
// the already-updated weights. adam, grams, and cautious-adam share one
// moment pipeline, so in the fully aligned regime their steps are
// bit-identical, not merely close.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "grams/vec.hpp"

namespace grams {

enum class OptKind { adam, adamw, grams, lion, cadam, clion, rmsprop };
enum class ScaleMode { definition, algorithm };
enum class Schedule { constant, constant_with_warmup, linear_decay, cosine };

struct HyperParams {
  double eta_base = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-6;
  double weight_decay = 0.0;
  Schedule schedule = Schedule::constant;
  long warmup_steps = 0;      // ramp length; for cosine, overrides the ratio when > 0
  long total_steps = 0;       // horizon for linear_decay and cosine
  double warmup_ratio = 0.03; // cosine warmup fraction when warmup_steps == 0
};

struct MomentState {
  Vec m;
  Vec v;
  long t = 0;
};

inline MomentState make_state(std::size_t dim) {
  return MomentState{Vec(dim, 0.0), Vec(dim, 0.0), 0};
}

struct StepResult {
  Vec new_weights;
  MomentState new_state;
  Vec update_direction;  // the applied -eta*u_hat term, before weight decay
  double effective_lr = 0.0;
};

// Scheduled learning rate for step t (1-based). Finite schedules return their
// terminal value for t past the horizon, never a negative rate.
inline double lr_at(const HyperParams& hp, long t) {
  if (t < 1) throw std::invalid_argument("lr_at: step index starts at 1");
  switch (hp.schedule) {
    case Schedule::constant:
      return hp.eta_base;
    case Schedule::constant_with_warmup: {
      if (hp.warmup_steps < 1)
        throw std::invalid_argument("lr_at: warmup schedule needs warmup_steps >= 1");
      if (t >= hp.warmup_steps) return hp.eta_base;
      return hp.eta_base * (static_cast<double>(t) / static_cast<double>(hp.warmup_steps));
    }
    case Schedule::linear_decay: {
      if (hp.total_steps < 1)
        throw std::invalid_argument("lr_at: linear decay needs total_steps >= 1");
      if (t >= hp.total_steps) return 0.0;
      return hp.eta_base * (1.0 - static_cast<double>(t) / static_cast<double>(hp.total_steps));
    }
    case Schedule::cosine: {
      if (hp.total_steps < 1)
        throw std::invalid_argument("lr_at: cosine needs total_steps >= 1");
      long warm = hp.warmup_steps;
      if (warm <= 0)
        warm = static_cast<long>(std::ceil(hp.warmup_ratio * static_cast<double>(hp.total_steps)));
      if (warm > 0 && t <= warm)
        return hp.eta_base * (static_cast<double>(t) / static_cast<double>(warm));
      if (t >= hp.total_steps) return 0.0;
      const double frac =
          static_cast<double>(t - warm) / static_cast<double>(hp.total_steps - warm);
      return hp.eta_base * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
    }
  }
  throw std::logic_error("lr_at: unhandled schedule");
}

namespace detail {

inline void check_step_inputs(const Vec& w, const Vec& g, const MomentState& st) {
  const std::size_t d = w.size();
  if (d == 0) throw std::invalid_argument("step: empty parameter vector");
  if (g.size() != d || st.m.size() != d || st.v.size() != d)
    throw std::invalid_argument("step: dimension mismatch");
  if (st.t < 0) throw std::invalid_argument("step: negative step counter");
  if (!all_finite(w) || !all_finite(g) || !all_finite(st.m) || !all_finite(st.v))
    throw std::domain_error("step: non-finite input");
}

// w + (-eta*u_hat), then decoupled decay on the result. Shared by all
// steppers so equal inputs take exactly equal arithmetic paths.
inline StepResult apply_direction(const Vec& w, Vec u_hat, MomentState next, double eta,
                                  double gamma) {
  StepResult r;
  r.effective_lr = eta;
  r.update_direction = std::move(u_hat);
  r.new_weights.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    r.update_direction[i] = -eta * r.update_direction[i];
    r.new_weights[i] = w[i] + r.update_direction[i];
  }
  if (gamma != 0.0)
    for (double& x : r.new_weights) x -= eta * gamma * x;
  if (!all_finite(r.new_weights) || !all_finite(r.update_direction))
    throw std::domain_error("step: non-finite result");
  r.new_state = std::move(next);
  return r;
}

}  // namespace detail

// Moment update plus bias-corrected direction u = m_hat / (sqrt(v_hat) + eps)
// for step t = st.t + 1. Shared by adam, grams, and cautious-adam.
struct AdamPipeline {
  Vec m;
  Vec v;
  Vec u;
  long t;
};

inline AdamPipeline adam_pipeline(const Vec& g, const MomentState& st, const HyperParams& hp) {
  const std::size_t d = g.size();
  AdamPipeline p{Vec(d), Vec(d), Vec(d), st.t + 1};
  const double corr1 = 1.0 - std::pow(hp.beta1, static_cast<double>(p.t));
  const double corr2 = 1.0 - std::pow(hp.beta2, static_cast<double>(p.t));
  for (std::size_t i = 0; i < d; ++i) {
    p.m[i] = hp.beta1 * st.m[i] + (1.0 - hp.beta1) * g[i];
    p.v[i] = hp.beta2 * st.v[i] + (1.0 - hp.beta2) * g[i] * g[i];
    const double m_hat = p.m[i] / corr1;
    const double v_hat = p.v[i] / corr2;
    p.u[i] = m_hat / (std::sqrt(v_hat) + hp.epsilon);
  }
  return p;
}

inline StepResult adam_step(const Vec& w, const Vec& g, const MomentState& st,
                            const HyperParams& hp) {
  detail::check_step_inputs(w, g, st);
  AdamPipeline p = adam_pipeline(g, st, hp);
  const double eta = lr_at(hp, p.t);
  MomentState next{std::move(p.m), std::move(p.v), p.t};
  return detail::apply_direction(w, std::move(p.u), std::move(next), eta, hp.weight_decay);
}

// u_hat = sign(g) o |u|: gradient sign, adam magnitude. sign(0) annihilates
// the magnitude, so a zero-gradient coordinate never moves.
inline StepResult grams_step(const Vec& w, const Vec& g, const MomentState& st,
                             const HyperParams& hp) {
  detail::check_step_inputs(w, g, st);
  AdamPipeline p = adam_pipeline(g, st, hp);
  const double eta = lr_at(hp, p.t);
  Vec u_hat(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    u_hat[i] = (g[i] == 0.0) ? 0.0 : std::copysign(p.u[i], g[i]);
  MomentState next{std::move(p.m), std::move(p.v), p.t};
  return detail::apply_direction(w, std::move(u_hat), std::move(next), eta, hp.weight_decay);
}

// Alignment mask over u o g; ties at exactly zero count as aligned. The
// algorithm scale mode rescales the rate by d / (#active + 1), the
// definition mode leaves it untouched.
struct CautiousApply {
  Vec u_hat;
  double eta_bar;
  Vec mask;
};

inline CautiousApply cautious_apply(const Vec& u, const Vec& g, double eta, ScaleMode mode) {
  require_same_size(u, g);
  const std::size_t d = u.size();
  CautiousApply r{Vec(d), eta, Vec(d)};
  double active = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const bool keep = u[i] * g[i] >= 0.0;
    r.mask[i] = keep ? 1.0 : 0.0;
    r.u_hat[i] = keep ? u[i] : 0.0;
    active += r.mask[i];
  }
  if (mode == ScaleMode::algorithm)
    r.eta_bar = eta * static_cast<double>(d) / (active + 1.0);
  return r;
}

inline StepResult cautious_adam_step(const Vec& w, const Vec& g, const MomentState& st,
                                     const HyperParams& hp, ScaleMode mode) {
  detail::check_step_inputs(w, g, st);
  AdamPipeline p = adam_pipeline(g, st, hp);
  CautiousApply ca = cautious_apply(p.u, g, lr_at(hp, p.t), mode);
  MomentState next{std::move(p.m), std::move(p.v), p.t};
  return detail::apply_direction(w, std::move(ca.u_hat), std::move(next), ca.eta_bar,
                                 hp.weight_decay);
}

struct LionPipeline {
  Vec m;
  Vec u;
  long t;
};

inline LionPipeline lion_pipeline(const Vec& g, const MomentState& st, const HyperParams& hp) {
  const std::size_t d = g.size();
  LionPipeline p{Vec(d), Vec(d), st.t + 1};
  for (std::size_t i = 0; i < d; ++i) {
    p.u[i] = sign_of(hp.beta1 * st.m[i] + (1.0 - hp.beta1) * g[i]);
    p.m[i] = hp.beta2 * st.m[i] + (1.0 - hp.beta2) * g[i];
  }
  return p;
}

inline StepResult lion_step(const Vec& w, const Vec& g, const MomentState& st,
                            const HyperParams& hp) {
  detail::check_step_inputs(w, g, st);
  LionPipeline p = lion_pipeline(g, st, hp);
  const double eta = lr_at(hp, p.t);
  MomentState next{std::move(p.m), st.v, p.t};  // second moment unused, stays zero
  return detail::apply_direction(w, std::move(p.u), std::move(next), eta, hp.weight_decay);
}

inline StepResult cautious_lion_step(const Vec& w, const Vec& g, const MomentState& st,
                                     const HyperParams& hp, ScaleMode mode) {
  detail::check_step_inputs(w, g, st);
  LionPipeline p = lion_pipeline(g, st, hp);
  CautiousApply ca = cautious_apply(p.u, g, lr_at(hp, p.t), mode);
  MomentState next{std::move(p.m), st.v, p.t};
  return detail::apply_direction(w, std::move(ca.u_hat), std::move(next), ca.eta_bar,
                                 hp.weight_decay);
}

inline StepResult rmsprop_step(const Vec& w, const Vec& g, const MomentState& st,
                               const HyperParams& hp) {
  detail::check_step_inputs(w, g, st);
  const std::size_t d = g.size();
  Vec v(d), u(d);
  for (std::size_t i = 0; i < d; ++i) {
    v[i] = hp.beta2 * st.v[i] + (1.0 - hp.beta2) * g[i] * g[i];
    u[i] = g[i] / (std::sqrt(v[i]) + hp.epsilon);
  }
  const long t = st.t + 1;
  const double eta = lr_at(hp, t);
  MomentState next{st.m, std::move(v), t};  // first moment unused, stays zero
  return detail::apply_direction(w, std::move(u), std::move(next), eta, hp.weight_decay);
}

inline StepResult optimizer_step(OptKind kind, const Vec& w, const Vec& g, const MomentState& st,
                                 const HyperParams& hp,
                                 ScaleMode mode = ScaleMode::algorithm) {
  switch (kind) {
    case OptKind::adam:
    case OptKind::adamw:
      return adam_step(w, g, st, hp);
    case OptKind::grams:
      return grams_step(w, g, st, hp);
    case OptKind::lion:
      return lion_step(w, g, st, hp);
    case OptKind::cadam:
      return cautious_adam_step(w, g, st, hp, mode);
    case OptKind::clion:
      return cautious_lion_step(w, g, st, hp, mode);
    case OptKind::rmsprop:
      return rmsprop_step(w, g, st, hp);
  }
  throw std::logic_error("optimizer_step: unhandled kind");
}

// Optional pre-step global-norm clamp.
inline Vec clip_global_norm(Vec g, double max_norm) {
  if (max_norm <= 0.0) return g;
  const double n = norm(g);
  if (n > max_norm) {
    const double scale = max_norm / n;
    for (double& x : g) x *= scale;
  }
  return g;
}

}  // namespace grams
