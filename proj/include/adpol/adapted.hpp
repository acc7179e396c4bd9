#pragma once

// Adapted polarizations P(s) at a geodesic x. Tangent vectors to the manifold of
// geodesics are Jacobi fields along x, recorded by their data (Y(0), Y'(0)) in the
// orthonormal chart frame at x. The standard basis is
//   xi_k  = (e_k, 0)   horizontal,
//   eta_k = (0, e_k)   vertical,
// which is symplectic for omega(A, B) = <Y_A, Y'_B> - <Y'_A, Y_B>.

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "adpol/error.hpp"
#include "adpol/jacobi.hpp"
#include "adpol/linalg.hpp"
#include "adpol/models.hpp"
#include "adpol/semigroup.hpp"

namespace adpol {

enum class PolePolicy {
  fail,    ///< a pole on the continuation path means x is outside the domain
  detour,  ///< go around the estimated pole on a half-circle and continue
};

struct AdaptedConfig {
  JacobiConfig jacobi;
  FlowMethod flow = FlowMethod::automatic;
  PolePolicy pole_policy = PolePolicy::fail;
  double detour_radius = 0.05;
  /// Relative smallest singular value of Y(s) below which phi is not formed.
  double endpoint_threshold = 1e-8;
  /// Condition number of Im(phi) above which no complex structure is returned.
  double degenerate_condition = 1e10;
};

/// Jacobi data (Y(0), Y'(0)) of a tangent vector, in the chart frame at x.
struct TangentAtGeodesic {
  Vec y0;
  Vec yp0;

  static TangentAtGeodesic from_vector(const Vec& v) {
    const auto m = v.size() / 2;
    return {v.head(m), v.tail(m)};
  }
  Vec as_vector() const {
    Vec v(y0.size() + yp0.size());
    v << y0, yp0;
    return v;
  }
  static TangentAtGeodesic horizontal(int m, int k) { return {Vec::Unit(m, k), Vec::Zero(m)}; }
  static TangentAtGeodesic vertical(int m, int k) { return {Vec::Zero(m), Vec::Unit(m, k)}; }
};

/// phi(id) for the parameter s, in the standard basis at x.
struct PhiMatrix {
  CMat value;
  PolarizationParam s;
  /// Pole that was bypassed when the pole policy is `detour`.
  std::optional<PoleReport> detoured;
};

/// The real operator J (J^2 = -I) of P(s), acting on Jacobi-data coordinates at x.
struct ComplexStructureTensor {
  Mat J;
};

// ---------------------------------------------------------------------------
// symplectic form and coordinates

/// omega(xi, eta) = <Y0_xi, Yp0_eta> - <Yp0_xi, Y0_eta>.
inline double omega(const TangentAtGeodesic& xi, const TangentAtGeodesic& eta) {
  if (xi.y0.size() != eta.y0.size() || xi.yp0.size() != eta.yp0.size() || xi.y0.size() != xi.yp0.size())
    throw InvalidArgument("omega: tangent vectors belong to different spaces");
  return xi.y0.dot(eta.yp0) - xi.yp0.dot(eta.y0);
}

/// Change of coordinates from chart tangent vectors (dq, dp) at x to Jacobi data:
/// Y(0) = E^{-1} dq, Y'(0) = E^{-1} (dp + Gamma(dq, p)).
inline Mat chart_to_jacobi(const ModelMetric& metric, const GeodesicPoint& x) {
  const int m = metric.dim();
  const Mat einv = metric.frame(x.q).inverse();
  const auto gamma = metric.christoffel(x.q);
  Mat gp(m, m);
  for (int k = 0; k < m; ++k) gp.row(k) = (gamma[k] * x.p).transpose();
  Mat t = Mat::Zero(2 * m, 2 * m);
  t.topLeftCorner(m, m) = einv;
  t.bottomLeftCorner(m, m) = einv * gp;
  t.bottomRightCorner(m, m) = einv;
  return t;
}

// ---------------------------------------------------------------------------
// the semigroup action

/// x o g: the geodesic t -> x(a + b t).
inline GeodesicPoint act(const ModelMetric& metric, const GroupElement& g, const GeodesicPoint& x,
                         const AdaptedConfig& cfg = {}) {
  GeodesicPoint y = g.a == 0.0 ? x : geodesic_flow(metric, x, g.a, cfg.flow, cfg.jacobi.integrator);
  y.p *= g.b;
  return y;
}

/// Matrix of the tangent action xi -> xi g from Jacobi data at x to Jacobi data at x o g.
/// If xi has Jacobi field Y(t), xi g has Y(a + b t); the data (Y(a), b Y'(a)) are rotated from
/// the parallel frame into the chart frame at x o g.
inline Mat act_tangent_matrix(const ModelMetric& metric, const GroupElement& g, const GeodesicPoint& x,
                              const AdaptedConfig& cfg = {}) {
  const int m = metric.dim();
  Mat rot = Mat::Identity(m, m);
  Mat fund = Mat::Identity(2 * m, 2 * m);  // [[Y, Z], [Y', Z']] at time a
  if (g.a != 0.0) {
    const FlowState fs = geodesic_flow_with_frame(metric, x, g.a, cfg.flow, cfg.jacobi.integrator);
    rot = metric.frame(fs.point.q).partialPivLu().solve(fs.frame);
    const JacobiState st = solve_real(curvature_along(metric, x), JacobiState::standard(m), g.a, cfg.jacobi);
    fund.topRows(m) = st.Y.real();
    fund.bottomRows(m) = st.Yp.real();
  }
  Mat out(2 * m, 2 * m);
  out.topRows(m) = rot * fund.topRows(m);
  out.bottomRows(m) = g.b * rot * fund.bottomRows(m);
  return out;
}

inline TangentAtGeodesic act_tangent(const ModelMetric& metric, const GroupElement& g,
                                     const GeodesicPoint& x, const TangentAtGeodesic& xi,
                                     const AdaptedConfig& cfg = {}) {
  return TangentAtGeodesic::from_vector(act_tangent_matrix(metric, g, x, cfg) * xi.as_vector());
}

// ---------------------------------------------------------------------------
// phi

/// phi0(a) with phi0(a)^T = Y(a)^{-1} Z(a): the vertical fields written in terms of the
/// horizontal ones at real time a.
inline Mat phi_real(const ModelMetric& metric, const GeodesicPoint& x, double a,
                    const AdaptedConfig& cfg = {}) {
  const int m = metric.dim();
  const JacobiState st = solve_real(curvature_along(metric, x), JacobiState::standard(m), a, cfg.jacobi);
  const Mat y = st.Y.real().leftCols(m);
  const Mat z = st.Y.real().rightCols(m);
  const auto range = singular_range(y);
  if (range.ratio() < cfg.endpoint_threshold)
    throw SingularMatrix("phi_real: Y(a) is singular (a lies on the pole set)",
                         range.smallest > 0 ? range.largest / range.smallest : INFINITY);
  return y.partialPivLu().solve(z).transpose();
}

/// The analytic continuation of phi0 to the complex time s, i.e. phi(id) for Q(s).
inline PhiMatrix phi_at(const ModelMetric& metric, const GeodesicPoint& x, const PolarizationParam& s,
                        const AdaptedConfig& cfg = {}) {
  if (s.is_infinite()) throw Unsupported("phi_at: no adapted polarization is constructed for s = infinity");
  if (s.is_real()) throw InvalidArgument("phi_at: real s gives a real polarization; use real_polarization");
  const int m = metric.dim();
  const cplx end = s.value();
  const CurvatureAlongGeodesic R = curvature_along(metric, x);

  PhiMatrix out{CMat(), s, std::nullopt};
  JacobiState st;
  try {
    st = continue_complex(R, JacobiState::standard(m), ContinuationPath::straight(end), cfg.jacobi);
  } catch (const PoleOnPath& pole) {
    if (cfg.pole_policy != PolePolicy::detour) throw;
    out.detoured = pole.report();
    st = continue_complex(R, JacobiState::standard(m),
                          ContinuationPath::detour(end, pole.report().location, cfg.detour_radius),
                          cfg.jacobi);
  }
  const CMat y = st.Y.leftCols(m);
  const CMat z = st.Y.rightCols(m);
  const auto range = singular_range(y);
  if (range.ratio() < cfg.endpoint_threshold)
    throw SingularMatrix("phi_at: Y(s) is singular at the end of the path (domain boundary)",
                         range.smallest > 0 ? range.largest / range.smallest : INFINITY);
  out.value = y.partialPivLu().solve(z).transpose();
  return out;
}

// ---------------------------------------------------------------------------
// complex structure

/// J with (0,1)-space span{eta_j - sum_k phi_jk xi_k}. With phi = A + iB:
///   J = [[-A B^-1, -B - A B^-1 A], [B^-1, B^-1 A]].
inline ComplexStructureTensor complex_structure(const CMat& phi, double degenerate_condition = 1e10) {
  const int m = static_cast<int>(phi.rows());
  const Mat a = 0.5 * (phi.real() + phi.real().transpose());
  const Mat b = 0.5 * (phi.imag() + phi.imag().transpose());
  const auto range = singular_range(b);
  if (!(range.smallest > 0) || range.largest / range.smallest > degenerate_condition)
    throw DegeneratePolarization("complex_structure: Im(phi) is numerically singular");
  const Mat binv = b.inverse();
  Mat j(2 * m, 2 * m);
  j.topLeftCorner(m, m) = -a * binv;
  j.topRightCorner(m, m) = -b - a * binv * a;
  j.bottomLeftCorner(m, m) = binv;
  j.bottomRightCorner(m, m) = binv * a;
  return {j};
}

inline ComplexStructureTensor complex_structure(const ModelMetric& metric, const GeodesicPoint& x,
                                                const PolarizationParam& s, const AdaptedConfig& cfg = {}) {
  return complex_structure(phi_at(metric, x, s, cfg).value, cfg.degenerate_condition);
}

/// J expressed on chart tangent vectors (dq, dp) at x.
inline Mat complex_structure_chart(const ModelMetric& metric, const GeodesicPoint& x,
                                   const PolarizationParam& s, const AdaptedConfig& cfg = {}) {
  const Mat t = chart_to_jacobi(metric, x);
  return t.partialPivLu().solve(complex_structure(metric, x, s, cfg).J * t);
}

// ---------------------------------------------------------------------------
// real polarization

/// Basis (columns, Jacobi data) of ker d pi_s at x, pi_s(x) = x(s): the fields with Y(s) = 0.
inline Mat real_polarization(const ModelMetric& metric, const GeodesicPoint& x, double s,
                             const AdaptedConfig& cfg = {}) {
  const int m = metric.dim();
  Mat frame = Mat::Zero(2 * m, m);
  if (s == 0.0) {
    frame.bottomRows(m).setIdentity();
    return frame;
  }
  const JacobiState st = solve_real(curvature_along(metric, x), JacobiState::standard(m), s, cfg.jacobi);
  const Mat values = st.Y.real();  // m x 2m, [Y(s) Z(s)]
  // kernel of [Y Z], of dimension m
  Eigen::JacobiSVD<Mat> svd(values, Eigen::ComputeFullV);
  frame = svd.matrixV().rightCols(m);
  // normalise so the vertical block is the identity when possible (gives (-phi0^T e_k, e_k))
  const Mat vert = frame.bottomRows(m);
  if (singular_range(vert).ratio() > 1e-10) frame = frame * vert.inverse();
  return frame;
}

/// The s = infinity polarization, available only along the zero section: the horizontal
/// frame {(e_k, 0)}. Elsewhere it is not constructed.
inline Mat polarization_at_infinity(const ModelMetric& metric, const GeodesicPoint& x) {
  if (x.p.size() != metric.dim()) throw InvalidArgument("polarization_at_infinity: dimension mismatch");
  if (x.p.cwiseAbs().maxCoeff() != 0.0)
    throw Unsupported("polarization_at_infinity: only constructed along the zero section");
  const int m = metric.dim();
  Mat frame = Mat::Zero(2 * m, m);
  frame.topRows(m).setIdentity();
  return frame;
}

// ---------------------------------------------------------------------------
// canonical bundle

/// h^K(theta) = 2^m |theta(xi_1..xi_m)|^2 det Im phi. Nonnegative for Im s > 0; for Im s < 0
/// it carries the sign (-1)^m of det Im phi, matching the definition through omega^m.
inline double canonical_metric(const PhiMatrix& phi, cplx theta_coeff) {
  const int m = static_cast<int>(phi.value.rows());
  const Mat b = 0.5 * (phi.value.imag() + phi.value.imag().transpose());
  return std::pow(2.0, m) * std::norm(theta_coeff) * b.determinant();
}

inline double canonical_metric(const ModelMetric& metric, const GeodesicPoint& x, const PolarizationParam& s,
                               cplx theta_coeff, const AdaptedConfig& cfg = {}) {
  return canonical_metric(phi_at(metric, x, s, cfg), theta_coeff);
}

// ---------------------------------------------------------------------------
// domain bookkeeping

struct DomainReport {
  bool inside = false;
  /// Smallest eigenvalue of Im(phi) sign(Im s); NaN when phi could not be formed.
  double margin = NAN;
  std::string status;
};

inline DomainReport domain_check(const ModelMetric& metric, const GeodesicPoint& x, const PolarizationParam& s,
                                 const AdaptedConfig& cfg = {}) {
  if (s.is_infinite()) return {false, NAN, "unsupported"};
  if (s.is_real()) return {false, NAN, "real-polarization branch"};
  try {
    const PhiMatrix phi = phi_at(metric, x, s, cfg);
    const double sign = s.value().imag() > 0 ? 1.0 : -1.0;
    const Mat b = 0.5 * sign * (phi.value.imag() + phi.value.imag().transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(b, Eigen::EigenvaluesOnly);
    const double margin = eig.eigenvalues().minCoeff();
    if (!(margin > 0.0)) return {false, margin, "indefinite"};
    return {true, margin, "ok"};
  } catch (const PoleOnPath&) {
    return {false, NAN, "pole-on-path"};
  } catch (const SingularMatrix&) {
    return {false, NAN, "singular-endpoint"};
  } catch (const AnalyticityDomainError&) {
    return {false, NAN, "analyticity"};
  } catch (const BlowupError&) {
    return {false, NAN, "blowup"};
  } catch (const ChartExit&) {
    return {false, NAN, "chart-exit"};
  } catch (const IntegratorFailure&) {
    return {false, NAN, "integrator-failure"};
  }
}

}  // namespace adpol
