#pragma once

// Model real-analytic Riemannian manifolds: charts, geodesic flow with a
// parallel orthonormal frame, and the Jacobi operator along a geodesic,
// continued to complex time.

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "adpol/error.hpp"
#include "adpol/linalg.hpp"
#include "adpol/ode.hpp"

namespace adpol {

/// Meridian profile r(u) of a surface of revolution du^2 + r(u)^2 dtheta^2, u arclength.
class Profile {
 public:
  enum class Kind { cylinder, sphere, hyperbolic, torus, catenoid };

  static Profile cylinder(double radius) { return Profile(Kind::cylinder, radius, 0.0); }
  /// r = rho sin(u/rho): the round sphere of radius rho, K = 1/rho^2.
  static Profile sphere(double rho) { return Profile(Kind::sphere, rho, 0.0); }
  /// r = rho sinh(u/rho): the hyperbolic plane in polar form, K = -1/rho^2.
  static Profile hyperbolic(double rho) { return Profile(Kind::hyperbolic, rho, 0.0); }
  /// r = R + rho cos(u/rho) with R > rho > 0.
  static Profile torus(double big_radius, double rho) {
    return Profile(Kind::torus, rho, big_radius);
  }
  /// r = sqrt(c^2 + u^2): the catenoid with neck radius c.
  static Profile catenoid(double neck) { return Profile(Kind::catenoid, neck, 0.0); }

  Kind kind() const { return kind_; }
  double rho() const { return rho_; }
  double big_radius() const { return big_; }

  std::string name() const {
    switch (kind_) {
      case Kind::cylinder: return "cylinder";
      case Kind::sphere: return "sphere";
      case Kind::hyperbolic: return "hyperbolic";
      case Kind::torus: return "torus";
      case Kind::catenoid: return "catenoid";
    }
    return "?";
  }

  template <typename T>
  T r(T u) const {
    using std::cos, std::sin, std::sinh, std::sqrt;
    switch (kind_) {
      case Kind::cylinder: return T(rho_);
      case Kind::sphere: return rho_ * sin(u / rho_);
      case Kind::hyperbolic: return rho_ * sinh(u / rho_);
      case Kind::torus: return big_ + rho_ * cos(u / rho_);
      case Kind::catenoid: return sqrt(rho_ * rho_ + u * u);
    }
    return T(0);
  }

  template <typename T>
  T dr(T u) const {
    using std::cos, std::cosh, std::sin, std::sqrt;
    switch (kind_) {
      case Kind::cylinder: return T(0);
      case Kind::sphere: return cos(u / rho_);
      case Kind::hyperbolic: return cosh(u / rho_);
      case Kind::torus: return -sin(u / rho_);
      case Kind::catenoid: return u / sqrt(rho_ * rho_ + u * u);
    }
    return T(0);
  }

  template <typename T>
  T ddr(T u) const {
    using std::cos, std::sin, std::sinh, std::sqrt;
    switch (kind_) {
      case Kind::cylinder: return T(0);
      case Kind::sphere: return -sin(u / rho_) / rho_;
      case Kind::hyperbolic: return sinh(u / rho_) / rho_;
      case Kind::torus: return -cos(u / rho_) / rho_;
      case Kind::catenoid: {
        const T w = rho_ * rho_ + u * u;
        return rho_ * rho_ / (w * sqrt(w));
      }
    }
    return T(0);
  }

  /// Gauss curvature K = -r''/r, with the removable singularity of the space forms taken out.
  template <typename T>
  T gauss_curvature(T u) const {
    switch (kind_) {
      case Kind::cylinder: return T(0);
      case Kind::sphere: return T(1.0 / (rho_ * rho_));
      case Kind::hyperbolic: return T(-1.0 / (rho_ * rho_));
      default: return -ddr(u) / r(u);
    }
  }

  /// Coordinate patch in u for the real surface.
  double u_min() const {
    switch (kind_) {
      case Kind::sphere:
      case Kind::hyperbolic: return 0.0;
      default: return -1e3;
    }
  }
  double u_max() const {
    switch (kind_) {
      case Kind::sphere: return kPi * rho_;
      default: return 1e3;
    }
  }

  /// Half-width of the horizontal strip |Im u| < strip on which r, r', r'' are analytic
  /// and r has no zeros other than those on the real boundary of the chart.
  double analytic_strip() const {
    switch (kind_) {
      case Kind::hyperbolic: return kPi * rho_;
      case Kind::torus: return rho_ * std::acosh(big_ / rho_);
      case Kind::catenoid: return rho_;
      default: return std::numeric_limits<double>::infinity();
    }
  }

 private:
  Profile(Kind k, double rho, double big) : kind_(k), rho_(rho), big_(big) {
    if (!(rho > 0.0)) throw InvalidArgument("Profile: radius parameter must be positive");
    if (k == Kind::torus && !(big > rho))
      throw InvalidArgument("Profile: torus needs R > rho so that r > 0");
  }

  Kind kind_;
  double rho_;
  double big_;
};

/// Flat R^m in global coordinates.
struct Euclidean {
  int dim = 1;
};

/// Constant sectional curvature c != 0, in the conformal chart g = (2 / (1 + c|q|^2))^2 delta
/// (stereographic for c > 0, Poincare ball for c < 0).
struct ConstantCurvature {
  int dim = 2;
  double curvature = 1.0;
};

/// Surface of revolution in the (u, theta) chart.
struct SurfaceOfRevolution {
  Profile profile = Profile::torus(2.0, 1.0);
};

/// A point of TM in chart coordinates; identifies the geodesic x with x'(0) = p at x(0) = q.
struct GeodesicPoint {
  Vec q;
  Vec p;
};

enum class FlowMethod {
  automatic,  ///< closed form when the model has one, numeric otherwise
  numeric,
};

class ModelMetric {
 public:
  using Variant = std::variant<Euclidean, ConstantCurvature, SurfaceOfRevolution>;

  ModelMetric(Variant v) : model_(std::move(v)) { validate(); }  // NOLINT
  static ModelMetric euclidean(int m) { return ModelMetric(Euclidean{m}); }
  static ModelMetric constant_curvature(int m, double c) {
    return ModelMetric(ConstantCurvature{m, c});
  }
  static ModelMetric revolution(Profile profile) {
    return ModelMetric(SurfaceOfRevolution{profile});
  }

  const Variant& variant() const { return model_; }

  int dim() const {
    return std::visit(
        [](const auto& m) -> int {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, SurfaceOfRevolution>) return 2;
          else return m.dim;
        },
        model_);
  }

  std::string name() const {
    if (auto* e = std::get_if<Euclidean>(&model_)) return "euclidean" + std::to_string(e->dim);
    if (auto* c = std::get_if<ConstantCurvature>(&model_))
      return (c->curvature > 0 ? "sphere" : "hyperbolic") + std::to_string(c->dim) +
             "(c=" + fmt_double(c->curvature) + ")";
    return "revolution(" + std::get<SurfaceOfRevolution>(model_).profile.name() + ")";
  }

  bool has_closed_form_flow() const {
    return !std::holds_alternative<SurfaceOfRevolution>(model_);
  }

  /// True iff q lies in the coordinate patch.
  bool in_chart(const Vec& q) const {
    if (q.size() != dim() || !q.allFinite()) return false;
    if (auto* c = std::get_if<ConstantCurvature>(&model_)) {
      return c->curvature > 0 || c->curvature * q.squaredNorm() > -1.0;
    }
    if (auto* s = std::get_if<SurfaceOfRevolution>(&model_)) {
      return q(0) > s->profile.u_min() && q(0) < s->profile.u_max() && s->profile.r(q(0)) > 0.0;
    }
    return true;
  }

  Mat metric_tensor(const Vec& q) const {
    const int m = dim();
    if (auto* c = std::get_if<ConstantCurvature>(&model_)) {
      const double l = conformal_factor(*c, q);
      return l * l * Mat::Identity(m, m);
    }
    if (auto* s = std::get_if<SurfaceOfRevolution>(&model_)) {
      const double r = s->profile.r(q(0));
      Mat g = Mat::Identity(2, 2);
      g(1, 1) = r * r;
      return g;
    }
    return Mat::Identity(m, m);
  }

  /// Partial derivatives d_k g, one matrix per coordinate k.
  std::vector<Mat> metric_derivative(const Vec& q) const {
    const int m = dim();
    std::vector<Mat> dg(m, Mat::Zero(m, m));
    if (auto* c = std::get_if<ConstantCurvature>(&model_)) {
      const double l = conformal_factor(*c, q);
      for (int k = 0; k < m; ++k) {
        const double dl = -c->curvature * q(k) * l * l;
        dg[k] = 2.0 * l * dl * Mat::Identity(m, m);
      }
    } else if (auto* s = std::get_if<SurfaceOfRevolution>(&model_)) {
      dg[0](1, 1) = 2.0 * s->profile.r(q(0)) * s->profile.dr(q(0));
    }
    return dg;
  }

  /// Christoffel symbols; gamma[k](i, j) = Gamma^k_{ij}.
  std::vector<Mat> christoffel(const Vec& q) const {
    const int m = dim();
    std::vector<Mat> gamma(m, Mat::Zero(m, m));
    if (auto* c = std::get_if<ConstantCurvature>(&model_)) {
      // g = e^{2f} delta: Gamma^k_ij = delta_ki f_j + delta_kj f_i - delta_ij f_k
      const double l = conformal_factor(*c, q);
      const Vec df = -c->curvature * l * q;
      for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j)
            gamma[k](i, j) = (k == i ? df(j) : 0.0) + (k == j ? df(i) : 0.0) -
                             (i == j ? df(k) : 0.0);
    } else if (auto* s = std::get_if<SurfaceOfRevolution>(&model_)) {
      const double r = s->profile.r(q(0));
      const double dr = s->profile.dr(q(0));
      gamma[0](1, 1) = -r * dr;
      gamma[1](0, 1) = gamma[1](1, 0) = dr / r;
    }
    return gamma;
  }

  /// Orthonormal frame at q aligned with the coordinate axes; columns are frame vectors.
  Mat frame(const Vec& q) const {
    const int m = dim();
    if (auto* c = std::get_if<ConstantCurvature>(&model_))
      return Mat::Identity(m, m) / conformal_factor(*c, q);
    if (auto* s = std::get_if<SurfaceOfRevolution>(&model_)) {
      Mat e = Mat::Identity(2, 2);
      e(1, 1) = 1.0 / s->profile.r(q(0));
      return e;
    }
    return Mat::Identity(m, m);
  }

  /// Components of the velocity p in the orthonormal frame at q.
  Vec frame_velocity(const GeodesicPoint& x) const {
    return frame(x.q).partialPivLu().solve(x.p);
  }

  static double conformal_factor(const ConstantCurvature& c, const Vec& q) {
    return 2.0 / (1.0 + c.curvature * q.squaredNorm());
  }

 private:
  static std::string fmt_double(double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  void validate() const {
    if (auto* e = std::get_if<Euclidean>(&model_); e && e->dim < 1)
      throw InvalidArgument("Euclidean: dimension must be >= 1");
    if (auto* c = std::get_if<ConstantCurvature>(&model_)) {
      if (c->dim < 1) throw InvalidArgument("ConstantCurvature: dimension must be >= 1");
      if (c->curvature == 0.0 || !std::isfinite(c->curvature))
        throw InvalidArgument("ConstantCurvature: curvature must be finite and nonzero");
    }
  }

  Variant model_;
};

/// v(x) = |p|_g^2.
inline double speed_squared(const ModelMetric& metric, const GeodesicPoint& x) {
  return x.p.dot(metric.metric_tensor(x.q) * x.p);
}

/// A geodesic point together with a parallel orthonormal frame along it. The frame starts
/// as the chart frame at the initial point; columns are coordinate vectors at `point.q`.
struct FlowState {
  GeodesicPoint point;
  Mat frame;
};

namespace detail {

/// Embedding of the conformal chart of a space form into R^{m+1} with the bilinear form
/// <X, Y> = sum_{i<m} X_i Y_i + eps X_m Y_m, eps = sign(c), image {<X, X> = eps / |c|}.
struct SpaceFormEmbedding {
  int m;
  double c;
  double eps;
  double rho;  // 1 / sqrt|c|

  explicit SpaceFormEmbedding(const ConstantCurvature& cc)
      : m(cc.dim), c(cc.curvature), eps(cc.curvature > 0 ? 1.0 : -1.0),
        rho(1.0 / std::sqrt(std::abs(cc.curvature))) {}

  double form(const Vec& x, const Vec& y) const {
    return x.head(m).dot(y.head(m)) + eps * x(m) * y(m);
  }

  Vec embed(const Vec& q) const {
    const Vec big_q = q / rho;
    const double n2 = big_q.squaredNorm();
    const double n = 1.0 + eps * n2;
    Vec x(m + 1);
    x.head(m) = 2.0 * rho * big_q / n;
    x(m) = rho * (1.0 - eps * n2) / n;
    return x;
  }

  /// dX/dq, an (m+1) x m matrix.
  Mat jacobian(const Vec& q) const {
    const Vec big_q = q / rho;
    const double n = 1.0 + eps * big_q.squaredNorm();
    Mat d(m + 1, m);
    d.topRows(m) = 2.0 * rho * (Mat::Identity(m, m) / n - 2.0 * eps * big_q * big_q.transpose() / (n * n));
    d.row(m) = -4.0 * rho * eps * big_q.transpose() / (n * n);
    return d / rho;
  }

  Vec unembed(const Vec& x) const {
    const double denom = rho + x(m);
    if (!(std::abs(denom) > 1e-12 * rho)) throw ChartExit("space form: geodesic left the conformal chart");
    return rho * x.head(m) / denom;
  }

  /// Coordinates of an ambient tangent vector w at embed(q).
  Vec pullback(const Vec& q, const Vec& w) const {
    const double l = ModelMetric::conformal_factor(ConstantCurvature{m, c}, q);
    const Mat d = jacobian(q);
    Vec gw = w;
    gw(m) *= eps;
    return d.transpose() * gw / (l * l);
  }
};

/// C(t) = cos(sqrt(k) t) and S(t) = sin(sqrt(k) t) / sqrt(k), continued to all real k.
inline std::pair<double, double> trig_pair(double k, double t) {
  if (k > 0) {
    const double w = std::sqrt(k);
    return {std::cos(w * t), std::sin(w * t) / w};
  }
  if (k < 0) {
    const double w = std::sqrt(-k);
    return {std::cosh(w * t), std::sinh(w * t) / w};
  }
  return {1.0, t};
}

inline FlowState closed_form_flow(const ModelMetric& metric, const GeodesicPoint& x, double t) {
  const int m = metric.dim();
  if (std::holds_alternative<Euclidean>(metric.variant()))
    return {{x.q + t * x.p, x.p}, Mat::Identity(m, m)};

  const auto& cc = std::get<ConstantCurvature>(metric.variant());
  const SpaceFormEmbedding emb(cc);
  const Vec x0 = emb.embed(x.q);
  const Mat d0 = emb.jacobian(x.q);
  const Vec w0 = d0 * x.p;
  const Mat f0 = d0 * metric.frame(x.q);
  const double v = speed_squared(metric, x);
  const auto [c, s] = trig_pair(cc.curvature * v, t);

  const Vec xt = c * x0 + s * w0;
  const Vec wt = -cc.curvature * v * s * x0 + c * w0;
  Mat ft = f0;
  if (v > 0.0) {
    for (int j = 0; j < m; ++j) {
      const double along = emb.form(f0.col(j), w0) / v;
      ft.col(j) = f0.col(j) + along * (wt - w0);
    }
  }
  const Vec qt = emb.unembed(xt);
  Mat frame(m, m);
  for (int j = 0; j < m; ++j) frame.col(j) = emb.pullback(qt, ft.col(j));
  return {{qt, emb.pullback(qt, wt)}, frame};
}

inline FlowState numeric_flow(const ModelMetric& metric, const GeodesicPoint& x, double t,
                              const IntegratorConfig& cfg) {
  const int m = metric.dim();
  Vec state(2 * m + m * m);
  state << x.q, x.p, metric.frame(x.q).reshaped();
  RealRhs rhs = [&](double, const Vec& y, Vec& dy) {
    const Vec q = y.head(m);
    const Vec p = y.segment(m, m);
    if (!metric.in_chart(q)) throw ChartExit("geodesic_flow: geodesic left the coordinate patch");
    const auto gamma = metric.christoffel(q);
    dy.resize(y.size());
    dy.head(m) = p;
    Mat gp(m, m);  // (Gamma(., p))^k_i
    for (int k = 0; k < m; ++k) {
      dy(m + k) = -p.dot(gamma[k] * p);
      gp.row(k) = (gamma[k] * p).transpose();
    }
    const Mat frame = y.tail(m * m).reshaped(m, m);
    dy.tail(m * m) = (-gp * frame).reshaped();
  };
  const Vec out = integrate_real(rhs, state, 0.0, t, cfg);
  FlowState fs{{out.head(m), out.segment(m, m)}, out.tail(m * m).reshaped(m, m)};
  if (!metric.in_chart(fs.point.q)) throw ChartExit("geodesic_flow: endpoint outside the coordinate patch");
  return fs;
}

}  // namespace detail

/// Flows x by time t along its geodesic, carrying the chart frame at x by parallel transport.
inline FlowState geodesic_flow_with_frame(const ModelMetric& metric, const GeodesicPoint& x, double t,
                                          FlowMethod method = FlowMethod::automatic,
                                          const IntegratorConfig& cfg = {}) {
  if (x.q.size() != metric.dim() || x.p.size() != metric.dim())
    throw InvalidArgument("geodesic_flow: point dimension does not match the model");
  if (!metric.in_chart(x.q)) throw ChartExit("geodesic_flow: start point outside the coordinate patch");
  if (method == FlowMethod::automatic && metric.has_closed_form_flow())
    return detail::closed_form_flow(metric, x, t);
  return detail::numeric_flow(metric, x, t, cfg);
}

inline GeodesicPoint geodesic_flow(const ModelMetric& metric, const GeodesicPoint& x, double t,
                                   FlowMethod method = FlowMethod::automatic,
                                   const IntegratorConfig& cfg = {}) {
  return geodesic_flow_with_frame(metric, x, t, method, cfg).point;
}

/// The Jacobi operator R(tau) Y = R(Y, x') x' along the geodesic through x, written in the
/// parallel orthonormal frame that starts as the chart frame at x:
///   R(tau) = K(tau) (v I - u u^T),
/// u the frame velocity and K the sectional curvature of the plane spanned by the velocity
/// (constant for space forms; the Gauss curvature at the complexified geodesic otherwise).
/// Surfaces of revolution carry the complexified geodesic (u, theta, u', theta') as an
/// auxiliary state that the Jacobi engine integrates alongside.
class CurvatureAlongGeodesic {
 public:
  static CurvatureAlongGeodesic constant(const Mat& shape, double k) {
    CurvatureAlongGeodesic c;
    c.shape_ = shape;
    c.constant_ = k;
    return c;
  }

  static CurvatureAlongGeodesic revolution(const Mat& shape, const Profile& profile,
                                           const GeodesicPoint& x) {
    CurvatureAlongGeodesic c;
    c.shape_ = shape;
    c.profile_ = profile;
    c.aux0_.resize(4);
    c.aux0_ << x.q(0), x.q(1), x.p(0), x.p(1);
    return c;
  }

  int dim() const { return static_cast<int>(shape_.rows()); }
  const Mat& shape() const { return shape_; }
  bool is_constant() const { return !profile_.has_value(); }
  /// Number of auxiliary complex unknowns carried by the integrator.
  int aux_size() const { return static_cast<int>(aux0_.size()); }
  const CVec& aux_initial() const { return aux0_; }

  /// Right-hand side of the complexified geodesic equations for the auxiliary state.
  void aux_rhs(const CVec& aux, CVec& daux) const {
    daux.resize(aux.size());
    if (!profile_) return;
    const cplx u = aux(0);
    check_analytic(u);
    const cplx r = profile_->r(u);
    const cplx dr = profile_->dr(u);
    const cplx du = aux(2);
    const cplx dth = aux(3);
    daux(0) = du;
    daux(1) = dth;
    daux(2) = r * dr * dth * dth;
    daux(3) = -2.0 * dr / r * du * dth;
  }

  /// Scalar curvature factor K at the auxiliary state.
  cplx factor(const CVec& aux) const {
    if (!profile_) return constant_;
    check_analytic(aux(0));
    return profile_->gauss_curvature(aux(0));
  }

  CMat matrix(const CVec& aux) const { return factor(aux) * shape_.cast<cplx>(); }

  /// R(tau), continuing the auxiliary state along the straight segment from 0 to tau.
  CMat evaluate(cplx tau, const IntegratorConfig& cfg = {}) const {
    if (!profile_) return matrix(aux0_);
    ComplexRhs rhs = [this](cplx, const CVec& a, CVec& da) { aux_rhs(a, da); };
    return matrix(integrate_segment(rhs, aux0_, 0.0, tau, cfg).state);
  }

 private:
  void check_analytic(cplx u) const {
    const double strip = profile_->analytic_strip();
    if (std::abs(u.imag()) >= 0.98 * strip)
      throw AnalyticityDomainError("curvature_along: complexified geodesic left the analyticity strip");
    if (std::abs(profile_->r(u)) < 1e-8 * profile_->rho())
      throw AnalyticityDomainError("curvature_along: profile vanishes at the complexified geodesic");
  }

  Mat shape_;
  double constant_ = 0.0;
  std::optional<Profile> profile_;
  CVec aux0_;
};

inline CurvatureAlongGeodesic curvature_along(const ModelMetric& metric, const GeodesicPoint& x) {
  if (!metric.in_chart(x.q)) throw ChartExit("curvature_along: point outside the coordinate patch");
  const int m = metric.dim();
  const Vec u = metric.frame_velocity(x);
  const Mat shape = u.squaredNorm() * Mat::Identity(m, m) - u * u.transpose();
  if (std::holds_alternative<Euclidean>(metric.variant()))
    return CurvatureAlongGeodesic::constant(shape, 0.0);
  if (auto* c = std::get_if<ConstantCurvature>(&metric.variant()))
    return CurvatureAlongGeodesic::constant(shape, c->curvature);
  return CurvatureAlongGeodesic::revolution(shape, std::get<SurfaceOfRevolution>(metric.variant()).profile, x);
}

}  // namespace adpol
