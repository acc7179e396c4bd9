#pragma once

// Matrix Jacobi equation Y'' + R(tau) Y = 0 along a geodesic, solved in real time
// and continued along polygonal paths in the complex time plane.

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adpol/error.hpp"
#include "adpol/linalg.hpp"
#include "adpol/models.hpp"
#include "adpol/ode.hpp"

namespace adpol {

/// Values Y and derivatives Y' (both m x k) of k Jacobi fields at complex time tau.
struct JacobiState {
  CMat Y;
  CMat Yp;
  cplx tau = 0.0;

  /// Y(0) = I, Y'(0) = 0.
  static JacobiState horizontal(int m) {
    return {CMat::Identity(m, m), CMat::Zero(m, m), 0.0};
  }
  /// Y(0) = 0, Y'(0) = I.
  static JacobiState vertical(int m) { return {CMat::Zero(m, m), CMat::Identity(m, m), 0.0}; }
  /// Both standard families side by side: Y = [I 0], Y' = [0 I].
  static JacobiState standard(int m) {
    JacobiState st{CMat::Zero(m, 2 * m), CMat::Zero(m, 2 * m), 0.0};
    st.Y.leftCols(m).setIdentity();
    st.Yp.rightCols(m).setIdentity();
    return st;
  }
};

/// Polygonal path in the complex time plane, starting at 0.
struct ContinuationPath {
  std::vector<cplx> waypoints{0.0};

  static ContinuationPath straight(cplx end) { return {{0.0, end}}; }

  /// Straight path 0 -> end with a half-circle of radius `radius` around `pole`,
  /// drawn with `pieces` chords on the left of the direction of travel.
  static ContinuationPath detour(cplx end, cplx pole, double radius, int pieces = 16) {
    const cplx dir = end / std::abs(end);
    const double along = std::real(pole * std::conj(dir));
    ContinuationPath path;
    const cplx centre = along * dir;
    for (int k = 0; k <= pieces; ++k) {
      const double angle = kPi - kPi * k / pieces;  // from behind the pole to past it
      path.waypoints.push_back(centre + radius * dir * std::polar(1.0, angle));
    }
    path.waypoints.push_back(end);
    return path;
  }

  cplx end() const { return waypoints.back(); }
  double length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < waypoints.size(); ++i) len += std::abs(waypoints[i] - waypoints[i - 1]);
    return len;
  }
};

/// A near-singularity of Y met along a continuation path.
struct PoleReport {
  cplx location = 0.0;
  /// Relative smallest singular value sigma_min / sigma_max of the leading m x m block of Y
  /// at the accepted steps leading up to the pole.
  std::vector<std::pair<cplx, double>> indicator;
  double minimum = 0.0;
};

class PoleOnPath : public Error {
 public:
  explicit PoleOnPath(PoleReport report)
      : Error("continue_complex: Y becomes singular on the continuation path near tau = " +
              format(report.location)),
        report_(std::move(report)) {}
  const PoleReport& report() const { return report_; }

 private:
  static std::string format(cplx z) {
    return std::to_string(z.real()) + (z.imag() < 0 ? "-" : "+") + std::to_string(std::abs(z.imag())) + "i";
  }
  PoleReport report_;
};

struct JacobiConfig {
  IntegratorConfig integrator;
  /// Pole threshold on the relative smallest singular value of Y.
  double pole_threshold = 1e-8;
  /// Samples below this value trigger a refined search for the minimum.
  double pole_prefilter = 1e-2;
  bool detect_poles = true;
};

namespace detail {

struct JacobiSystem {
  const CurvatureAlongGeodesic& R;
  int m;
  int k;

  int aux() const { return R.aux_size(); }

  CVec pack(const CVec& aux_state, const JacobiState& st) const {
    CVec x(aux() + 2 * m * k);
    x.head(aux()) = aux_state;
    x.segment(aux(), m * k) = st.Y.reshaped();
    x.tail(m * k) = st.Yp.reshaped();
    return x;
  }

  JacobiState unpack(const CVec& x, cplx tau) const {
    return {x.segment(aux(), m * k).reshaped(m, k), x.tail(m * k).reshaped(m, k), tau};
  }

  void rhs(const CVec& x, CVec& dx) const {
    dx.resize(x.size());
    const CVec a = x.head(aux());
    if (aux() > 0) {
      CVec da;
      R.aux_rhs(a, da);
      dx.head(aux()) = da;
    }
    const CMat Y = x.segment(aux(), m * k).reshaped(m, k);
    dx.segment(aux(), m * k) = x.tail(m * k);
    dx.tail(m * k) = (-(R.matrix(a) * Y)).reshaped();
  }

  double indicator(const CVec& x) const {
    const CMat Y = x.segment(aux(), m * k).reshaped(m, k);
    return singular_range(Y.leftCols(std::min(m, k))).ratio();
  }
};

}  // namespace detail

/// Integrates the Jacobi fields `init` (given at tau = 0) along `path`.
/// With pole detection on, a bracketed dip of the relative smallest singular value of Y
/// below `pole_threshold` raises PoleOnPath carrying the estimated location.
inline JacobiState continue_complex(const CurvatureAlongGeodesic& R, const JacobiState& init,
                                    const ContinuationPath& path, const JacobiConfig& cfg = {}) {
  const int m = R.dim();
  if (init.Y.rows() != m || init.Yp.rows() != m || init.Y.cols() != init.Yp.cols())
    throw InvalidArgument("continue_complex: initial data do not match the curvature dimension");
  if (init.tau != 0.0 || path.waypoints.empty() || path.waypoints.front() != 0.0)
    throw InvalidArgument("continue_complex: paths and initial data start at tau = 0");
  for (std::size_t i = 1; i < path.waypoints.size(); ++i)
    if (path.waypoints[i] == path.waypoints[i - 1])
      throw InvalidArgument("continue_complex: consecutive waypoints must be distinct");

  const detail::JacobiSystem sys{R, m, static_cast<int>(init.Y.cols())};
  ComplexRhs rhs = [&sys](cplx, const CVec& x, CVec& dx) { sys.rhs(x, dx); };
  CVec x = sys.pack(R.aux_initial(), init);

  PoleReport trace;
  for (std::size_t seg = 1; seg < path.waypoints.size(); ++seg) {
    const cplx a = path.waypoints[seg - 1];
    const cplx b = path.waypoints[seg];
    const double len = std::abs(b - a);
    const cplx dir = (b - a) / len;

    struct Sample {
      double sigma;
      double value;
      CVec x;
    };
    std::vector<Sample> last{{0.0, sys.indicator(x), x}};

    StepObserver observer = [&](double sigma, cplx tau, const CVec& xs) {
      const double ind = sys.indicator(xs);
      trace.indicator.emplace_back(tau, ind);
      last.push_back({sigma, ind, xs});
      if (last.size() > 3) last.erase(last.begin());
      if (last.size() < 3) return true;
      const Sample& lo = last[0];
      const Sample& mid = last[1];
      const Sample& hi = last[2];
      if (!(mid.value <= lo.value && mid.value <= hi.value && mid.value < cfg.pole_prefilter))
        return true;
      // golden-section search for the minimum on [lo, hi], restarting from lo each time
      auto eval = [&](double s) {
        if (s == lo.sigma) return lo.value;
        const auto r = integrate_segment(rhs, lo.x, a + lo.sigma * dir, a + s * dir, cfg.integrator);
        return sys.indicator(r.state);
      };
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double l = lo.sigma, h = hi.sigma;
      double c1 = h - gr * (h - l), c2 = l + gr * (h - l);
      double f1 = eval(c1), f2 = eval(c2);
      for (int it = 0; it < 80 && (h - l) > 1e-14 * std::max(1.0, len); ++it) {
        if (f1 < f2) {
          h = c2; c2 = c1; f2 = f1; c1 = h - gr * (h - l); f1 = eval(c1);
        } else {
          l = c1; c1 = c2; f1 = f2; c2 = l + gr * (h - l); f2 = eval(c2);
        }
      }
      const double best = std::min({f1, f2, mid.value});
      if (best < cfg.pole_threshold) {
        trace.location = a + 0.5 * (l + h) * dir;
        trace.minimum = best;
        throw PoleOnPath(trace);
      }
      return true;
    };

    const auto res = integrate_segment(rhs, x, a, b, cfg.integrator,
                                       cfg.detect_poles ? observer : StepObserver{});
    x = res.state;
  }
  return sys.unpack(x, path.end());
}

/// Jacobi fields in real time: solves Y'' + R Y = 0 from 0 to t.
inline JacobiState solve_real(const CurvatureAlongGeodesic& R, const JacobiState& init, double t,
                              const JacobiConfig& cfg = {}) {
  if (init.Y.imag().cwiseAbs().sum() + init.Yp.imag().cwiseAbs().sum() != 0.0)
    throw InvalidArgument("solve_real: initial data must be real");
  JacobiConfig real_cfg = cfg;
  real_cfg.detect_poles = false;
  if (t == 0.0) return init;
  JacobiState out = continue_complex(R, init, ContinuationPath::straight(t), real_cfg);
  out.Y = out.Y.real().cast<cplx>();
  out.Yp = out.Yp.real().cast<cplx>();
  return out;
}

/// W(A, B) = Y_A^T Y'_B - Y'_A^T Y_B, constant in tau for solutions of one Jacobi equation.
inline CMat wronskian(const JacobiState& A, const JacobiState& B) {
  if (A.Y.rows() != B.Y.rows() || A.Y.rows() != A.Yp.rows() || B.Y.rows() != B.Yp.rows())
    throw InvalidArgument("wronskian: dimension mismatch");
  if (A.tau != B.tau) throw InvalidArgument("wronskian: states at different times");
  return A.Y.transpose() * B.Yp - A.Yp.transpose() * B.Y;
}

}  // namespace adpol
