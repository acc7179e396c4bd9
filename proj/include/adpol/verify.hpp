#pragma once

// Numerical checks of the structural identities satisfied by the adapted
// polarizations: pullback laws under the semigroup action, the Kahler identity
// omega = (Im s) 1/2 dd^c v, equivariance, the canonical-bundle metric, the
// Monge-Ampere degeneracy of v and holomorphy of the fibration trivialization.

#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "adpol/adapted.hpp"
#include "adpol/forms.hpp"
#include "adpol/linalg.hpp"
#include "adpol/models.hpp"
#include "adpol/semigroup.hpp"

namespace adpol {

struct CheckReport {
  std::string name;
  double residual = NAN;
  double tolerance = 0.0;
  bool passed = false;
  std::string context;
};

inline CheckReport make_report(std::string name, double residual, double tolerance, std::string context) {
  const bool ok = residual <= tolerance;  // false for NaN
  return {std::move(name), residual, tolerance, ok, std::move(context)};
}

struct VerifyConfig {
  AdaptedConfig adapted;
  /// Finite-difference step in chart units.
  double step = 1e-3;
};

/// Point of the fibration Z: a parameter s and a geodesic x.
struct FibrationPoint {
  cplx s;
  GeodesicPoint x;
};

/// (s, x) lies in Z iff x o g is in the domain of P(i), where g.i = s.
inline bool in_fibration(const ModelMetric& metric, const FibrationPoint& z, const AdaptedConfig& cfg = {}) {
  if (z.s.imag() == 0.0) return true;  // fibers over the real axis carry real polarizations
  const GroupElement g = solve_transporter(cplx(0, 1), z.s).g;
  try {
    return domain_check(metric, act(metric, g, z.x, cfg), cplx(0, 1), cfg).inside;
  } catch (const Error&) {
    return false;
  }
}

namespace detail {

inline std::string describe(const ModelMetric& metric, const GeodesicPoint& x) {
  std::ostringstream os;
  os.precision(6);
  os << metric.name() << " q=[";
  for (int i = 0; i < x.q.size(); ++i) os << (i ? " " : "") << x.q(i);
  os << "] p=[";
  for (int i = 0; i < x.p.size(); ++i) os << (i ? " " : "") << x.p(i);
  os << "]";
  return os.str();
}

inline std::string describe_s(cplx s) {
  std::ostringstream os;
  os.precision(6);
  os << " s=" << s.real() << (s.imag() < 0 ? "-" : "+") << std::abs(s.imag()) << "i";
  return os.str();
}

/// Chart coordinates (q, p) packed into one vector.
inline Vec pack(const GeodesicPoint& x) {
  Vec z(x.q.size() + x.p.size());
  z << x.q, x.p;
  return z;
}

inline GeodesicPoint unpack(const Vec& z) {
  const auto m = z.size() / 2;
  return {z.head(m), z.tail(m)};
}

/// dv in chart coordinates: (p^T d_k g p, 2 g p).
inline Vec dv_chart(const ModelMetric& metric, const GeodesicPoint& x) {
  const int m = metric.dim();
  const auto dg = metric.metric_derivative(x.q);
  Vec d(2 * m);
  for (int k = 0; k < m; ++k) d(k) = x.p.dot(dg[k] * x.p);
  d.tail(m) = 2.0 * metric.metric_tensor(x.q) * x.p;
  return d;
}

/// The one-form alpha = dv o J in chart coordinates (row vector).
inline Vec dv_compose_j(const ModelMetric& metric, const GeodesicPoint& x, const PolarizationParam& s,
                        const AdaptedConfig& cfg) {
  return complex_structure_chart(metric, x, s, cfg).transpose() * dv_chart(metric, x);
}

/// d(dv o J) at x by central differences of the coefficients: Theta_ij = d_i a_j - d_j a_i.
inline Mat d_of_dv_j(const ModelMetric& metric, const GeodesicPoint& x, const PolarizationParam& s, double h,
                     const AdaptedConfig& cfg) {
  const int n = 2 * metric.dim();
  const Vec z = pack(x);
  Mat grad(n, n);  // grad(i, j) = d_i alpha_j
  for (int i = 0; i < n; ++i) {
    Vec zp = z, zm = z;
    zp(i) += h;
    zm(i) -= h;
    grad.row(i) = ((dv_compose_j(metric, unpack(zp), s, cfg) - dv_compose_j(metric, unpack(zm), s, cfg)) /
                   (2.0 * h)).transpose();
  }
  return grad - grad.transpose();
}

/// Canonical form on the chart, sum dq^i ^ d(g_ij p^j), as a matrix.
inline Mat canonical_form_chart(const ModelMetric& metric, const GeodesicPoint& x) {
  const int m = metric.dim();
  const auto dg = metric.metric_derivative(x.q);
  Mat dP(m, 2 * m);  // differential of P_i = g_ij p^j
  for (int k = 0; k < m; ++k) dP.col(k) = dg[k] * x.p;
  dP.rightCols(m) = metric.metric_tensor(x.q);
  Mat w = Mat::Zero(2 * m, 2 * m);
  for (int i = 0; i < m; ++i) {
    Vec dq = Vec::Unit(2 * m, i);
    Vec dpi = dP.row(i).transpose();
    w += dq * dpi.transpose() - dpi * dq.transpose();
  }
  return w;
}

}  // namespace detail

/// omega in chart coordinates, computed from the Jacobi-data pairing.
inline Mat omega_chart(const ModelMetric& metric, const GeodesicPoint& x) {
  const Mat t = chart_to_jacobi(metric, x);
  return t.transpose() * standard_symplectic(metric.dim()) * t;
}

// ---------------------------------------------------------------------------

/// |omega(xi g, eta g) - chi(g) omega(xi, eta)| over all pairs of basis vectors, plus
/// |v(x g) - chi(g)^2 v(x)|.
inline CheckReport check_pullbacks(const ModelMetric& metric, const GeodesicPoint& x, const GroupElement& g,
                                   const VerifyConfig& cfg = {}, double tol = 1e-8) {
  const int m = metric.dim();
  const Mat a = act_tangent_matrix(metric, g, x, cfg.adapted);
  const Mat w = standard_symplectic(m);
  const double form_defect = max_abs(a.transpose() * w * a - character(g) * w);
  const double v = speed_squared(metric, x);
  const double v_defect =
      std::abs(speed_squared(metric, act(metric, g, x, cfg.adapted)) - character(g) * character(g) * v);
  std::ostringstream ctx;
  ctx << detail::describe(metric, x) << " g=" << g;
  return make_report("pullbacks", form_defect + v_defect, tol, ctx.str());
}

/// max |(Im s) 1/2 dd^c v - omega| over the chart basis, d^c v = -dv o J, with d taken by
/// central differences of step h.
inline CheckReport check_kahler_identity(const ModelMetric& metric, const GeodesicPoint& x,
                                         const PolarizationParam& s, double h, const VerifyConfig& cfg = {},
                                         double tol = 1e-4) {
  const Mat theta = detail::d_of_dv_j(metric, x, s, h, cfg.adapted);
  const Mat lhs = -0.5 * s.value().imag() * theta;
  const double residual = max_abs(lhs - omega_chart(metric, x));
  std::ostringstream ctx;
  ctx << detail::describe(metric, x) << detail::describe_s(s.value()) << " h=" << h;
  return make_report("kahler", residual, tol, ctx.str());
}

/// The sign of omega(xi, J xi) on the first horizontal vector: +1 for Im s > 0, -1 below.
inline double kahler_positivity(const ModelMetric& metric, const GeodesicPoint& x, const PolarizationParam& s,
                                const VerifyConfig& cfg = {}) {
  const int m = metric.dim();
  const Mat j = complex_structure(metric, x, s, cfg.adapted).J;
  const Vec xi = Vec::Unit(2 * m, 0);
  return xi.dot(standard_symplectic(m) * (j * xi));
}

/// max |A_g* J^(g.s)_x - J^(s)_{x g} A_g*| in Jacobi-data coordinates.
inline CheckReport check_equivariance(const ModelMetric& metric, const GeodesicPoint& x,
                                      const PolarizationParam& s, const GroupElement& g,
                                      const VerifyConfig& cfg = {}, double tol = 1e-7) {
  if (character(g) == 0.0) throw InvalidArgument("check_equivariance: chi(g) must be nonzero");
  const Mat a = act_tangent_matrix(metric, g, x, cfg.adapted);
  const PolarizationParam gs = act_on_complex(g, s);
  const Mat j_gs = complex_structure(metric, x, gs, cfg.adapted).J;
  const Mat j_s = complex_structure(metric, act(metric, g, x, cfg.adapted), s, cfg.adapted).J;
  const double residual = max_abs(a * j_gs - j_s * a);
  std::ostringstream ctx;
  ctx << detail::describe(metric, x) << detail::describe_s(s.value()) << " g=" << g;
  return make_report("equivariance", residual, tol, ctx.str());
}

/// Values of both sides of the canonical-metric identity for theta normalised by
/// theta(xi_1, ..., xi_m) = 1.
struct CanonicalMetricValues {
  double from_phi = NAN;     ///< 2^m det Im phi
  double from_volume = NAN;  ///< i^{m^2} m! theta ^ conj(theta) / omega^m
};

inline CanonicalMetricValues canonical_metric_values(const PhiMatrix& phi, double degenerate_condition = 1e10) {
  const int m = static_cast<int>(phi.value.rows());
  const int n = 2 * m;
  const Mat j = complex_structure(phi.value, degenerate_condition).J;
  // (1,0)-forms theta_k = f^k - i f^k o J, f^k the vertical coordinate functionals
  std::vector<Form> theta;
  CMat on_xi(m, m);
  for (int k = 0; k < m; ++k) {
    const Vec f = Vec::Unit(n, m + k);
    const CVec coeffs = f.cast<cplx>() - cplx(0, 1) * (j.transpose() * f).cast<cplx>();
    theta.push_back(Form::one_form(coeffs));
    on_xi.row(k) = coeffs.head(m).transpose();
  }
  const cplx coeff = on_xi.determinant();  // theta(xi_1, ..., xi_m)
  Form top = theta[0];
  for (int k = 1; k < m; ++k) top = wedge(top, theta[k]);
  Form conj_top(n, m);
  {
    std::vector<Form> bars;
    for (int k = 0; k < m; ++k) {
      const Vec f = Vec::Unit(n, m + k);
      bars.push_back(Form::one_form(CVec(f.cast<cplx>() + cplx(0, 1) * (j.transpose() * f).cast<cplx>())));
    }
    conj_top = bars[0];
    for (int k = 1; k < m; ++k) conj_top = wedge(conj_top, bars[k]);
  }
  const cplx vol = wedge(top, conj_top).top();
  const cplx omega_m = power(Form::two_form(standard_symplectic(m)), m).top();
  double fact = 1.0;
  for (int k = 2; k <= m; ++k) fact *= k;
  const cplx i_m2 = std::pow(cplx(0, 1), m * m);
  CanonicalMetricValues out;
  out.from_volume = std::real(i_m2 * fact * vol / (omega_m * std::norm(coeff)));
  out.from_phi = canonical_metric(phi, 1.0);
  return out;
}

/// Relative mismatch between the closed formula for h^K and its definition through omega^m.
inline CheckReport check_canonical_metric(const ModelMetric& metric, const GeodesicPoint& x,
                                          const PolarizationParam& s, const VerifyConfig& cfg = {},
                                          double tol = 1e-6) {
  if (metric.dim() > 3) throw InvalidArgument("check_canonical_metric: implemented for m <= 3");
  const auto vals = canonical_metric_values(phi_at(metric, x, s, cfg.adapted), cfg.adapted.degenerate_condition);
  const double residual = std::abs(vals.from_volume - vals.from_phi) / std::abs(vals.from_phi);
  std::ostringstream ctx;
  ctx << detail::describe(metric, x) << detail::describe_s(s.value()) << " hK=" << vals.from_phi;
  return make_report("canonical_metric", residual, tol, ctx.str());
}

/// Both sides of 2 v (ddbar v)^m = m (ddbar v)^{m-1} ^ dbar v ^ d v on the chart volume.
struct MongeAmpereValues {
  cplx lhs;
  cplx rhs;
};

inline MongeAmpereValues monge_ampere_values(const ModelMetric& metric, const GeodesicPoint& x,
                                             const PolarizationParam& s, double h, const AdaptedConfig& cfg) {
  const int m = metric.dim();
  const Mat jc = complex_structure_chart(metric, x, s, cfg);
  const Vec dv = detail::dv_chart(metric, x);
  const Vec dvj = jc.transpose() * dv;
  const cplx i(0, 1);
  const Form del = Form::one_form(CVec(0.5 * (dv.cast<cplx>() - i * dvj.cast<cplx>())));
  const Form delbar = Form::one_form(CVec(0.5 * (dv.cast<cplx>() + i * dvj.cast<cplx>())));
  // dbar d v = -(i/2) d(dv o J)
  const Form ddbar = Form::two_form(CMat((-0.5 * i) * detail::d_of_dv_j(metric, x, s, h, cfg).cast<cplx>()));
  const double v = speed_squared(metric, x);
  const cplx lhs = 2.0 * v * power(ddbar, m).top();
  const Form tail = wedge(delbar, del);
  const cplx rhs = double(m) * (m > 1 ? wedge(power(ddbar, m - 1), tail) : tail).top();
  return {lhs, rhs};
}

inline CheckReport check_monge_ampere_fiber(const ModelMetric& metric, const GeodesicPoint& x,
                                            const PolarizationParam& s, double h, const VerifyConfig& cfg = {},
                                            double tol = 1e-3) {
  const auto vals = monge_ampere_values(metric, x, s, h, cfg.adapted);
  const double scale = std::abs(vals.lhs) + std::abs(vals.rhs);
  const double residual = scale > 0.0 ? std::abs(vals.lhs - vals.rhs) / scale : 0.0;
  std::ostringstream ctx;
  ctx << detail::describe(metric, x) << detail::describe_s(s.value()) << " h=" << h;
  return make_report("monge_ampere", residual, tol, ctx.str());
}

/// Psi_x(s) = x o g(s) with g(s).i = s; checks d Psi / d Im s = J^(i) d Psi / d Re s.
inline CheckReport check_fibration_holomorphy(const ModelMetric& metric, const GeodesicPoint& x, cplx s0, double h,
                                              const VerifyConfig& cfg = {}, double tol = 1e-4) {
  if (s0.imag() == 0.0) throw InvalidArgument("check_fibration_holomorphy: s0 must be off the real axis");
  auto psi = [&](cplx s) {
    return detail::pack(act(metric, solve_transporter(cplx(0, 1), s).g, x, cfg.adapted));
  };
  const Vec d_re = (psi(s0 + h) - psi(s0 - h)) / (2.0 * h);
  const Vec d_im = (psi(s0 + cplx(0, h)) - psi(s0 - cplx(0, h))) / (2.0 * h);
  const GeodesicPoint base = detail::unpack(psi(s0));
  const Mat j = complex_structure_chart(metric, base, cplx(0, 1), cfg.adapted);
  const double residual = max_abs(d_im - j * d_re);
  std::ostringstream ctx;
  ctx << detail::describe(metric, x) << detail::describe_s(s0) << " h=" << h;
  return make_report("fibration", residual, tol, ctx.str());
}

/// Lagrangian defect of the real polarization frame plus |Y(s)| of each frame field.
inline CheckReport check_real_polarization(const ModelMetric& metric, const GeodesicPoint& x, double s,
                                           const VerifyConfig& cfg = {}, double tol = 1e-8) {
  const int m = metric.dim();
  const Mat frame = real_polarization(metric, x, s, cfg.adapted);
  const double lagrangian = max_abs(frame.transpose() * standard_symplectic(m) * frame);
  double vertical = 0.0;
  if (s != 0.0) {
    const CurvatureAlongGeodesic R = curvature_along(metric, x);
    for (int k = 0; k < m; ++k) {
      JacobiState init{frame.col(k).head(m).cast<cplx>(), frame.col(k).tail(m).cast<cplx>(), 0.0};
      const JacobiState end = solve_real(R, init, s, cfg.adapted.jacobi);
      vertical = std::max(vertical, end.Y.cwiseAbs().maxCoeff() / frame.col(k).norm());
    }
  } else {
    vertical = max_abs(frame.topRows(m));
  }
  std::ostringstream ctx;
  ctx << detail::describe(metric, x) << " s=" << s;
  return make_report("real_polarization", lagrangian + vertical, tol, ctx.str());
}

/// residual(h) / residual(h / 2); about 4 for a second-order stencil.
template <typename Check>
double refinement_ratio(Check&& check, double h) {
  return check(h).residual / check(0.5 * h).residual;
}

// ---------------------------------------------------------------------------
// sampling

struct SampleOptions {
  double speed_sq_min = 0.05;
  double speed_sq_max = 0.5;
  /// Radius of the ball of base points in chart units (conformal and flat models).
  double base_radius = 0.5;
};

/// Random base point and velocity with v(x) uniform in [speed_sq_min, speed_sq_max].
template <typename Rng>
GeodesicPoint sample_point(const ModelMetric& metric, Rng& rng, const SampleOptions& opt = {}) {
  const int m = metric.dim();
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> gauss;
  Vec q(m);
  if (auto* rev = std::get_if<SurfaceOfRevolution>(&metric.variant())) {
    const Profile& pr = rev->profile;
    double lo = -1.0, hi = 1.0;
    if (pr.kind() == Profile::Kind::sphere) { lo = 0.35 * kPi * pr.rho(); hi = 0.65 * kPi * pr.rho(); }
    if (pr.kind() == Profile::Kind::hyperbolic) { lo = 0.8 * pr.rho(); hi = 1.5 * pr.rho(); }
    std::uniform_real_distribution<double> ud(lo, hi), th(0.0, 2.0 * kPi);
    q << ud(rng), th(rng);
  } else {
    double radius = opt.base_radius;
    if (auto* c = std::get_if<ConstantCurvature>(&metric.variant()); c && c->curvature < 0)
      radius = std::min(radius, 0.5 / std::sqrt(-c->curvature));
    do {
      for (int i = 0; i < m; ++i) q(i) = unit(rng);
    } while (q.norm() > 1.0);
    q *= radius;
  }
  Vec u(m);
  for (int i = 0; i < m; ++i) u(i) = gauss(rng);
  u.normalize();
  std::uniform_real_distribution<double> vd(opt.speed_sq_min, opt.speed_sq_max);
  const double v = vd(rng);
  return {q, metric.frame(q) * (std::sqrt(v) * u)};
}

}  // namespace adpol
