#pragma once

// Continuous-time descent on the augmented energy H(w,s) = loss(w) + K(s).
// Three drift variants share the damping maps phi(x) = a x and psi(x) = b x:
//   standard   dw/dt = -gK - a gL          ds/dt = gL - b gK
//   grams      dw/dt = -sign(gL) o |gK| - a gL
//   cautious   dw/dt = -gK o 1_{gL o gK > 0} - a gL
// (gL, gK shorthand for the two gradients; the cautious mask is strict, a
// zero product leaves the coordinate uncoupled.) descent_rates evaluates the
// closed-form instantaneous rates and cross-checks each against the
// directional derivative of its drift field. integrate_rk4 runs classical
// RK4 to observe H and the loss along trajectories.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "grams/objectives.hpp"
#include "grams/vec.hpp"

namespace grams {

inline Objective quadratic_kinetic(std::size_t dim) {
  Objective o;
  o.name = "quadratic_kinetic";
  o.dim = dim;
  o.value = [dim](const Vec& s) {
    detail::check_dim(s, dim, "quadratic_kinetic");
    return 0.5 * norm_sq(s);
  };
  o.gradient = [dim](const Vec& s) {
    detail::check_dim(s, dim, "quadratic_kinetic");
    return s;
  };
  o.L = 1.0;
  o.mu = 1.0;
  o.w_star = Vec(dim, 0.0);
  o.f_star = 0.0;
  o.default_init = Vec(dim, 0.0);
  return o;
}

struct HamiltonianSystem {
  Objective loss;
  Objective kinetic;
  double a = 0.0;
  double b = 0.0;
};

inline HamiltonianSystem make_system(Objective loss, double a, double b) {
  if (a < 0.0 || b < 0.0)
    throw std::invalid_argument("make_system: damping coefficients must be nonnegative");
  const std::size_t dim = loss.dim;
  return HamiltonianSystem{std::move(loss), quadratic_kinetic(dim), a, b};
}

inline double energy(const HamiltonianSystem& sys, const Vec& w, const Vec& s) {
  return sys.loss.value(w) + sys.kinetic.value(s);
}

enum class HamVariant { standard, grams, cautious };

inline const char* variant_name(HamVariant v) {
  switch (v) {
    case HamVariant::standard: return "standard";
    case HamVariant::grams: return "grams";
    case HamVariant::cautious: return "cautious";
  }
  return "?";
}

struct Drift {
  Vec dw;
  Vec ds;
};

namespace detail {

inline Drift drift_from_gradients(const Vec& gl, const Vec& gk, double a, double b,
                                  HamVariant variant) {
  const std::size_t d = gl.size();
  Drift out{Vec(d), Vec(d)};
  for (std::size_t i = 0; i < d; ++i) {
    double coupling;
    switch (variant) {
      case HamVariant::standard:
        coupling = gk[i];
        break;
      case HamVariant::grams:
        coupling = (gl[i] == 0.0) ? 0.0 : std::copysign(gk[i], gl[i]);
        break;
      case HamVariant::cautious:
        coupling = (gl[i] * gk[i] > 0.0) ? gk[i] : 0.0;
        break;
      default:
        throw std::logic_error("drift: unhandled variant");
    }
    out.dw[i] = -coupling - a * gl[i];
    out.ds[i] = gl[i] - b * gk[i];
  }
  return out;
}

}  // namespace detail

inline Drift variant_drift(const HamiltonianSystem& sys, HamVariant variant, const Vec& w,
                           const Vec& s) {
  require_same_size(w, s);
  return detail::drift_from_gradients(sys.loss.gradient(w), sys.kinetic.gradient(s), sys.a,
                                      sys.b, variant);
}

inline Drift standard_drift(const HamiltonianSystem& sys, const Vec& w, const Vec& s) {
  return variant_drift(sys, HamVariant::standard, w, s);
}

inline Drift grams_drift(const HamiltonianSystem& sys, const Vec& w, const Vec& s) {
  return variant_drift(sys, HamVariant::grams, w, s);
}

inline Drift cautious_drift(const HamiltonianSystem& sys, const Vec& w, const Vec& s) {
  return variant_drift(sys, HamVariant::cautious, w, s);
}

// Instantaneous rates at (w, s). The standard rates use the decreasing-rate
// convention (positive while the quantity falls):
//   delta_H_std = a ||gL||^2 + b ||gK||^2 = -d/dt H
//   delta_L_std = <gL, gK> + a ||gL||^2   = -d/dt loss
// The grams and cautious entries are plain d/dt values of H and the loss
// along their drift fields (negative while descending). drift_residual is
// the worst disagreement between each closed form and the directional
// derivative of the matching field, recomputed here as a consistency check.
struct RateSample {
  double delta_H_std = 0.0;
  double delta_L_std = 0.0;
  double delta_H_grams = 0.0;
  double delta_L_grams = 0.0;
  double delta_H_cautious = 0.0;
  double delta_L_cautious = 0.0;
  double drift_residual = 0.0;
};

inline RateSample descent_rates(const HamiltonianSystem& sys, const Vec& w, const Vec& s) {
  require_same_size(w, s);
  const Vec gl = sys.loss.gradient(w);
  const Vec gk = sys.kinetic.gradient(s);
  const double cross = dot(gl, gk);
  const double cross_abs = dot_abs(gl, gk);
  double masked_off = 0.0;  // <x, 1 - 1_{x > 0}> with x = gL o gK
  for (std::size_t i = 0; i < gl.size(); ++i) {
    const double x = gl[i] * gk[i];
    if (!(x > 0.0)) masked_off += x;
  }
  RateSample r;
  r.delta_H_std = sys.a * norm_sq(gl) + sys.b * norm_sq(gk);
  r.delta_L_std = cross + sys.a * norm_sq(gl);
  r.delta_H_grams = cross - cross_abs - r.delta_H_std;
  r.delta_L_grams = cross - cross_abs - r.delta_L_std;
  r.delta_H_cautious = masked_off - r.delta_H_std;
  r.delta_L_cautious = masked_off - r.delta_L_std;

  const Drift d_std = detail::drift_from_gradients(gl, gk, sys.a, sys.b, HamVariant::standard);
  const Drift d_gr = detail::drift_from_gradients(gl, gk, sys.a, sys.b, HamVariant::grams);
  const Drift d_ca = detail::drift_from_gradients(gl, gk, sys.a, sys.b, HamVariant::cautious);
  auto dH = [&](const Drift& d) { return dot(gl, d.dw) + dot(gk, d.ds); };
  auto dL = [&](const Drift& d) { return dot(gl, d.dw); };
  double res = 0.0;
  res = std::max(res, std::fabs(-r.delta_H_std - dH(d_std)));
  res = std::max(res, std::fabs(-r.delta_L_std - dL(d_std)));
  res = std::max(res, std::fabs(r.delta_H_grams - dH(d_gr)));
  res = std::max(res, std::fabs(r.delta_L_grams - dL(d_gr)));
  res = std::max(res, std::fabs(r.delta_H_cautious - dH(d_ca)));
  res = std::max(res, std::fabs(r.delta_L_cautious - dL(d_ca)));
  r.drift_residual = res;
  return r;
}

struct HamRecord {
  double t = 0.0;
  Vec w;
  Vec s;
  double H = 0.0;
  double loss = 0.0;
};

struct HamTrajectory {
  std::vector<HamRecord> records;  // steps+1 entries including t = 0
  bool aborted = false;            // state went non-finite mid-integration
};

inline HamTrajectory integrate_rk4(const HamiltonianSystem& sys, HamVariant variant, Vec w0,
                                   Vec s0, double dt, long steps) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_rk4: dt must be positive");
  if (steps < 1) throw std::invalid_argument("integrate_rk4: steps must be >= 1");
  require_same_size(w0, s0);
  if (!all_finite(w0) || !all_finite(s0))
    throw std::domain_error("integrate_rk4: non-finite initial state");

  const std::size_t d = w0.size();
  auto field = [&](const Vec& w, const Vec& s) { return variant_drift(sys, variant, w, s); };

  HamTrajectory traj;
  traj.records.reserve(static_cast<std::size_t>(steps) + 1);
  Vec w = std::move(w0), s = std::move(s0);
  traj.records.push_back(HamRecord{0.0, w, s, energy(sys, w, s), sys.loss.value(w)});

  Vec wt(d), st(d), wn(d), sn(d);
  for (long n = 1; n <= steps; ++n) {
    const Drift k1 = field(w, s);
    for (std::size_t i = 0; i < d; ++i) {
      wt[i] = w[i] + 0.5 * dt * k1.dw[i];
      st[i] = s[i] + 0.5 * dt * k1.ds[i];
    }
    const Drift k2 = field(wt, st);
    for (std::size_t i = 0; i < d; ++i) {
      wt[i] = w[i] + 0.5 * dt * k2.dw[i];
      st[i] = s[i] + 0.5 * dt * k2.ds[i];
    }
    const Drift k3 = field(wt, st);
    for (std::size_t i = 0; i < d; ++i) {
      wt[i] = w[i] + dt * k3.dw[i];
      st[i] = s[i] + dt * k3.ds[i];
    }
    const Drift k4 = field(wt, st);
    for (std::size_t i = 0; i < d; ++i) {
      wn[i] = w[i] + dt / 6.0 * (k1.dw[i] + 2.0 * k2.dw[i] + 2.0 * k3.dw[i] + k4.dw[i]);
      sn[i] = s[i] + dt / 6.0 * (k1.ds[i] + 2.0 * k2.ds[i] + 2.0 * k3.ds[i] + k4.ds[i]);
    }
    const double H = all_finite(wn) && all_finite(sn)
                         ? energy(sys, wn, sn)
                         : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(H)) {  // the state, or the energy it implies, overflowed
      traj.aborted = true;
      break;
    }
    w = wn;
    s = sn;
    traj.records.push_back(HamRecord{static_cast<double>(n) * dt, w, s, H, sys.loss.value(w)});
  }
  return traj;
}

}  // namespace grams
