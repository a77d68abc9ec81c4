#pragma once

// Adaptive explicit integration of a gradient flow x' = f(x) with an energy
// that must not increase along accepted steps.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "stratakit/errors.hpp"

namespace stratakit {

struct FlowOptions {
  double tol = 1e-8;               ///< stop when the residual drops below this
  std::size_t max_steps = 200000;  ///< accepted-step cap
  double dt_init = 1e-3;
  double energy_slack = 1e-9;      ///< permitted energy increase per step
  double local_tol = 1e-10;        ///< step-doubling error bound, relative to 1 + |x|
  double dt_max = 50.0;
  double dt_min = 1e-14;
};

template <typename Vec>
struct IntegrationTrace {
  Vec state;
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double residual = 0;
  double energy = 0;
  bool converged = false;
  double max_energy_increase = 0;  ///< largest increase over accepted steps
};

namespace detail {

template <typename Vec, typename Field>
Vec rk4_step(const Vec& x, double dt, Field& f) {
  Vec k1 = f(x);
  Vec k2 = f(Vec(x + (dt / 2) * k1));
  Vec k3 = f(Vec(x + (dt / 2) * k2));
  Vec k4 = f(Vec(x + dt * k3));
  return x + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace detail

/// RK4 with step doubling. `project` is applied to every candidate state
/// (re-orthonormalization, exact zero patterns) before it is judged. A step
/// is accepted only if the doubling error is within local_tol and the energy
/// does not grow by more than energy_slack.
template <typename Vec, typename Field, typename Energy, typename Residual, typename Project>
IntegrationTrace<Vec> integrate_gradient_flow(Vec x, Field&& field, Energy&& energy, Residual&& residual,
                                              Project&& project, const FlowOptions& opts) {
  if (!(opts.tol > 0)) throw InputError("tol must be positive", "tol");
  if (!(opts.dt_init > 0)) throw InputError("dt_init must be positive", "dt_init");
  IntegrationTrace<Vec> tr;
  project(x);
  double e = energy(x);
  double dt = opts.dt_init;
  while (true) {
    tr.residual = residual(x);
    if (!std::isfinite(tr.residual)) throw NumericError("non-finite gradient during flow");
    if (tr.residual < opts.tol) {
      tr.converged = true;
      break;
    }
    if (tr.steps >= opts.max_steps) break;

    Vec full = detail::rk4_step(x, dt, field);
    Vec half = detail::rk4_step(x, dt / 2, field);
    half = detail::rk4_step(half, dt / 2, field);
    project(full);
    project(half);
    const double err = (half - full).norm() / (1.0 + x.norm());
    const double e_new = std::isfinite(err) ? energy(half) : INFINITY;
    const bool ok = std::isfinite(err) && std::isfinite(e_new) && err <= opts.local_tol &&
                    e_new <= e + opts.energy_slack;
    if (!ok) {
      ++tr.rejected;
      double shrink = (std::isfinite(err) && err > 0) ? 0.9 * std::pow(opts.local_tol / err, 0.2) : 0.2;
      dt *= std::clamp(shrink, 0.1, 0.5);
      if (dt < opts.dt_min) throw NumericError("flow step size collapsed below " + std::to_string(opts.dt_min));
      continue;
    }
    tr.max_energy_increase = std::max(tr.max_energy_increase, e_new - e);
    x = std::move(half);
    e = e_new;
    ++tr.steps;
    double grow = err > 0 ? 0.9 * std::pow(opts.local_tol / err, 0.2) : 4.0;
    dt = std::min(opts.dt_max, dt * std::clamp(grow, 1.0, 4.0));
  }
  tr.state = std::move(x);
  tr.energy = e;
  return tr;
}

}  // namespace stratakit
