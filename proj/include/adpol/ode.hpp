#pragma once

// Adaptive Runge-Kutta integration of complex-valued systems along straight
// segments of the complex time plane. The stepper is Boost.odeint's controlled
// Dormand-Prince 5(4); the step loop (guards, observers) lives here.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include "adpol/error.hpp"
#include "adpol/linalg.hpp"

namespace boost::numeric::odeint {
// odeint's vector-space algebra returns the scalar type from norm_inf; for
// complex states the error norm has to be real.
template <>
struct vector_space_norm_inf<Eigen::VectorXcd> {
  using result_type = double;
  double operator()(const Eigen::VectorXcd& x) const {
    return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
  }
};
}  // namespace boost::numeric::odeint

namespace adpol {

/// Integrator settings. Tolerances default to 1e-12 absolute and relative.
struct IntegratorConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double initial_step = 1e-2;
  double min_step = 1e-13;
  std::size_t max_steps = 200000;
  /// Largest admissible |entry| of the state before the solve is declared a blowup.
  double overflow_guard = 1e12;
};

/// dX/dtau = F(tau, X) with complex time.
using ComplexRhs = std::function<void(cplx tau, const CVec& x, CVec& dxdtau)>;

/// Called after every accepted step with the arclength parameter along the segment,
/// the corresponding complex time and the state. Returning false stops the solve.
using StepObserver = std::function<bool(double sigma, cplx tau, const CVec& x)>;

namespace detail {

namespace odeint = boost::numeric::odeint;
using Stepper = odeint::runge_kutta_dopri5<CVec, double, CVec, double, odeint::vector_space_algebra>;

inline auto make_stepper(const IntegratorConfig& cfg) {
  return odeint::make_controlled(cfg.abs_tol, cfg.rel_tol, Stepper());
}

}  // namespace detail

/// Result of a segment solve: the final state and how far along the segment it is.
struct SegmentResult {
  CVec state;
  double sigma = 0.0;  ///< arclength reached
  bool stopped = false;  ///< observer asked to stop before the end
  std::size_t steps = 0;
};

/// Integrates X from tau0 to tau1 along the straight segment, parametrized by arclength
/// sigma in [0, |tau1 - tau0|]. The system actually solved is dX/dsigma = d F(tau0 + sigma d, X)
/// with d the unit direction, so real-time problems are the special case of a real segment.
inline SegmentResult integrate_segment(const ComplexRhs& rhs, const CVec& x0, cplx tau0, cplx tau1,
                                       const IntegratorConfig& cfg,
                                       const StepObserver& observer = {}) {
  SegmentResult res{x0, 0.0, false, 0};
  const double length = std::abs(tau1 - tau0);
  if (length == 0.0) return res;
  const cplx dir = (tau1 - tau0) / length;

  auto system = [&](const CVec& x, CVec& dx, double sigma) {
    dx.resize(x.size());
    rhs(tau0 + sigma * dir, x, dx);
    dx *= dir;
  };

  auto stepper = detail::make_stepper(cfg);
  double sigma = 0.0;
  double dt = std::min(cfg.initial_step, length);
  CVec x = x0;
  std::size_t fails = 0;
  while (sigma < length) {
    if (res.steps >= cfg.max_steps)
      throw IntegratorFailure("integrate_segment: step budget exhausted");
    bool last = false;
    if (sigma + dt >= length) {
      dt = length - sigma;
      last = true;
    }
    const auto outcome = stepper.try_step(system, x, sigma, dt);
    if (outcome == boost::numeric::odeint::fail) {
      if (dt < cfg.min_step * std::max(1.0, length))
        throw IntegratorFailure("integrate_segment: step size underflow");
      if (++fails > 10000) throw IntegratorFailure("integrate_segment: too many rejected steps");
      continue;
    }
    ++res.steps;
    if (last) sigma = length;  // absorb rounding in the final step
    if (!x.allFinite() || (x.size() > 0 && x.cwiseAbs().maxCoeff() > cfg.overflow_guard))
      throw BlowupError("integrate_segment: solution exceeded the overflow guard");
    if (observer && !observer(sigma, tau0 + sigma * dir, x)) {
      res.stopped = true;
      break;
    }
  }
  res.state = x;
  res.sigma = sigma;
  return res;
}

/// Convenience wrapper for real-valued systems in real time.
using RealRhs = std::function<void(double t, const Vec& x, Vec& dxdt)>;

inline Vec integrate_real(const RealRhs& rhs, const Vec& x0, double t0, double t1,
                          const IntegratorConfig& cfg) {
  ComplexRhs crhs = [&](cplx tau, const CVec& x, CVec& dx) {
    Vec xr = x.real();
    Vec dr(xr.size());
    rhs(tau.real(), xr, dr);
    dx = dr.cast<cplx>();
  };
  return integrate_segment(crhs, x0.cast<cplx>(), t0, t1, cfg).state.real();
}

}  // namespace adpol
