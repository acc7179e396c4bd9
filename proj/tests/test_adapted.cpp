#include <random>

#include <gtest/gtest.h>

#include "adpol/adapted.hpp"
#include "oracles.hpp"

using namespace adpol;

namespace {

double cmax(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

/// sum_i dq^i ^ d(g_ij p^j), assembled from numerical derivatives of the metric.
Mat canonical_two_form(const ModelMetric& metric, const GeodesicPoint& x) {
  const int m = metric.dim();
  const double h = 1e-6;
  Mat dP(m, 2 * m);
  for (int k = 0; k < m; ++k) {
    Vec qp = x.q, qm = x.q;
    qp(k) += h;
    qm(k) -= h;
    dP.col(k) = (metric.metric_tensor(qp) - metric.metric_tensor(qm)) * x.p / (2 * h);
  }
  dP.rightCols(m) = metric.metric_tensor(x.q);
  Mat w = Mat::Zero(2 * m, 2 * m);
  for (int i = 0; i < m; ++i)
    for (int b = 0; b < 2 * m; ++b) {
      w(i, b) += dP(i, b);
      w(b, i) -= dP(i, b);
    }
  return w;
}

GeodesicPoint with_speed(const ModelMetric& metric, const Vec& q, Vec dir, double v) {
  dir.normalize();
  return {q, metric.frame(q) * (std::sqrt(v) * dir)};
}

}  // namespace

TEST(Adapted, OmegaOnStandardBasis) {
  const int m = 3;
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) {
      const auto xj = TangentAtGeodesic::horizontal(m, j), xk = TangentAtGeodesic::horizontal(m, k);
      const auto ej = TangentAtGeodesic::vertical(m, j), ek = TangentAtGeodesic::vertical(m, k);
      EXPECT_EQ(omega(xj, xk), 0.0);
      EXPECT_EQ(omega(ej, ek), 0.0);
      EXPECT_EQ(omega(xj, ek), j == k ? 1.0 : 0.0);
    }
  const TangentAtGeodesic a{Vec{{1.0, 2.0}}, Vec{{-0.5, 3.0}}};
  EXPECT_EQ(omega(a, a), 0.0);
}

TEST(Adapted, ChartCoordinatesCarryTheCanonicalForm) {
  const std::vector<std::pair<ModelMetric, GeodesicPoint>> cases = {
      {ModelMetric::euclidean(2), {Vec{{0.3, 0.1}}, Vec{{0.5, -1.0}}}},
      {ModelMetric::constant_curvature(2, 1.0), {Vec{{0.3, 0.1}}, Vec{{0.5, -1.0}}}},
      {ModelMetric::constant_curvature(3, -1.0), {Vec{{0.3, 0.1, -0.2}}, Vec{{0.5, -1.0, 0.2}}}},
      {ModelMetric::revolution(Profile::torus(2.0, 1.0)), {Vec{{0.4, 0.1}}, Vec{{0.5, -0.3}}}},
  };
  for (const auto& [metric, x] : cases) {
    const Mat t = chart_to_jacobi(metric, x);
    const Mat w = t.transpose() * standard_symplectic(metric.dim()) * t;
    EXPECT_LT(max_abs(w - canonical_two_form(metric, x)), 1e-8) << metric.name();
  }
}

TEST(Adapted, ActionOnGeodesics) {
  const auto sphere = ModelMetric::constant_curvature(2, 1.0);
  const GeodesicPoint x{Vec{{0.2, 0.1}}, Vec{{0.3, -0.2}}};
  auto y = act(sphere, GroupElement::dilation(-1.5), x);
  EXPECT_EQ(y.q, x.q);
  EXPECT_LT(max_abs(y.p + 1.5 * x.p), 1e-15);
  y = act(sphere, GroupElement::translation(0.7), x);
  const auto z = geodesic_flow(sphere, x, 0.7);
  EXPECT_LT(max_abs(y.q - z.q) + max_abs(y.p - z.p), 1e-15);
  y = act(sphere, {0.0, 0.0}, x);
  EXPECT_EQ(y.q, x.q);
  EXPECT_EQ(y.p.norm(), 0.0);
  // x o (g o h) = (x o g) o h
  const GroupElement g{0.4, 1.3}, h{-0.2, 0.6};
  const auto lhs = act(sphere, compose(g, h), x);
  const auto rhs = act(sphere, h, act(sphere, g, x));
  EXPECT_LT(max_abs(lhs.q - rhs.q) + max_abs(lhs.p - rhs.p), 1e-12);
}

TEST(Adapted, FlatTangentAction) {
  const auto flat = ModelMetric::euclidean(2);
  const GeodesicPoint x{Vec{{1.0, 2.0}}, Vec{{0.5, 0.5}}};
  const GroupElement g{0.8, -1.7};
  const Vec e{{0.6, -0.8}};
  const auto xi = act_tangent(flat, g, x, {e, Vec::Zero(2)});
  EXPECT_LT(max_abs(xi.y0 - e) + max_abs(xi.yp0), 1e-13);
  const auto eta = act_tangent(flat, g, x, {Vec::Zero(2), e});
  EXPECT_LT(max_abs(eta.y0 - 0.8 * e) + max_abs(eta.yp0 + 1.7 * e), 1e-13);
}

TEST(Adapted, TangentActionScalesOmega) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-1, 1);
  const std::vector<ModelMetric> models = {ModelMetric::euclidean(3), ModelMetric::constant_curvature(2, 1.0),
                                           ModelMetric::revolution(Profile::torus(2.0, 1.0))};
  for (const auto& metric : models) {
    const int m = metric.dim();
    for (int k = 0; k < 4; ++k) {
      GeodesicPoint x{0.3 * Vec::NullaryExpr(m, [&] { return d(rng); }), 0.5 * Vec::NullaryExpr(m, [&] { return d(rng); })};
      const GroupElement g{d(rng), 2 * d(rng)};
      const TangentAtGeodesic a = TangentAtGeodesic::from_vector(Vec::NullaryExpr(2 * m, [&] { return d(rng); }));
      const TangentAtGeodesic b = TangentAtGeodesic::from_vector(Vec::NullaryExpr(2 * m, [&] { return d(rng); }));
      const double lhs = omega(act_tangent(metric, g, x, a), act_tangent(metric, g, x, b));
      EXPECT_NEAR(lhs, character(g) * omega(a, b), 1e-9) << metric.name();
    }
  }
}

TEST(Adapted, PhiRealClosedForms) {
  const GeodesicPoint x{Vec{{0.1, -0.2}}, Vec{{0.4, 0.3}}};
  EXPECT_LT(max_abs(phi_real(ModelMetric::euclidean(2), x, 1.3) - 1.3 * Mat::Identity(2, 2)), 1e-12);
  const auto sphere = ModelMetric::constant_curvature(2, 1.0);
  const Vec u = sphere.frame_velocity(x);
  const Mat expected = oracle::space_form_phi(1.0, u, 0.9).real();
  EXPECT_LT(max_abs(phi_real(sphere, x, 0.9) - expected), 1e-10);
  EXPECT_LT(max_abs(phi_real(sphere, x, 0.0)), 1e-15);
}

TEST(Adapted, FlatPhiIsScalar) {
  const auto flat = ModelMetric::euclidean(3);
  const GeodesicPoint x{Vec{{1.0, 0.0, -1.0}}, Vec{{0.2, 0.7, 0.1}}};
  for (cplx s : {cplx(0, 1), cplx(-2, 0.5), cplx(1, -2)}) {
    const auto phi = phi_at(flat, x, s);
    EXPECT_LT(cmax(phi.value - s * CMat::Identity(3, 3)), 1e-12);
  }
  EXPECT_THROW(phi_at(flat, x, 0.5), InvalidArgument);
  EXPECT_THROW(phi_at(flat, x, PolarizationParam::infinity()), Unsupported);
}

TEST(Adapted, SpaceFormPhiMatchesClosedForm) {
  for (double c : {1.0, -1.0}) {
    const auto metric = ModelMetric::constant_curvature(2, c);
    const auto x = with_speed(metric, Vec{{0.1, 0.2}}, Vec{{1.0, 1.0}}, 0.5);
    const Vec u = metric.frame_velocity(x);
    for (cplx s : {cplx(0, 1), cplx(1, 1), cplx(0.5, -0.8)}) {
      const auto phi = phi_at(metric, x, s);
      EXPECT_LT(cmax(phi.value - oracle::space_form_phi(c, u, s)), 1e-9) << c << " " << s;
      EXPECT_LT(cmax(phi.value - phi.value.transpose()), 1e-12);
    }
  }
}

TEST(Adapted, RoundProfileMatchesSphere) {
  const auto metric = ModelMetric::revolution(Profile::sphere(1.0));
  const GeodesicPoint x{Vec{{1.2, 0.3}}, Vec{{0.4, 0.5}}};
  const Vec u = metric.frame_velocity(x);
  const cplx s(0.3, 0.9);
  EXPECT_LT(cmax(phi_at(metric, x, s).value - oracle::space_form_phi(1.0, u, s)), 1e-9);
}

TEST(Adapted, HyperbolicEndpointSingularity) {
  const auto hyp = ModelMetric::constant_curvature(2, -1.0);
  const double v = 1.0;
  const auto x = with_speed(hyp, Vec::Zero(2), Vec{{1.0, 0.0}}, v);
  EXPECT_NO_THROW(phi_at(hyp, x, cplx(0, 1.5)));
  // the endpoint itself on the pole
  EXPECT_THROW(phi_at(hyp, x, cplx(0, oracle::pi / 2)), Error);
  EXPECT_THROW(phi_at(hyp, x, cplx(0, oracle::pi / 2 + 0.01)), PoleOnPath);
  EXPECT_TRUE(domain_check(hyp, x, cplx(0, 1.5)).inside);
  const auto past = domain_check(hyp, x, cplx(0, oracle::pi / 2 + 0.01));
  EXPECT_FALSE(past.inside);
  EXPECT_EQ(past.status, "pole-on-path");
}

TEST(Adapted, DetourPolicyContinuesPastPole) {
  const auto hyp = ModelMetric::constant_curvature(2, -1.0);
  const auto x = with_speed(hyp, Vec::Zero(2), Vec{{0.0, 1.0}}, 1.0);
  AdaptedConfig cfg;
  cfg.pole_policy = PolePolicy::detour;
  const cplx s(0, 2.0);
  const auto phi = phi_at(hyp, x, s, cfg);
  ASSERT_TRUE(phi.detoured.has_value());
  EXPECT_LT(cmax(phi.value - oracle::space_form_phi(-1.0, hyp.frame_velocity(x), s)), 1e-8);
  const auto report = domain_check(hyp, x, s, cfg);
  EXPECT_FALSE(report.inside);
  EXPECT_EQ(report.status, "indefinite");
}

TEST(Adapted, FlatComplexStructure) {
  for (int m : {1, 2, 3}) {
    const auto flat = ModelMetric::euclidean(m);
    const GeodesicPoint x{Vec::Ones(m), Vec::LinSpaced(m, -1, 1)};
    for (cplx s : {cplx(0, 1), cplx(0.5, 2), cplx(-1, -0.5)}) {
      const Mat j = complex_structure(flat, x, s).J;
      EXPECT_LT(max_abs(j - oracle::flat_complex_structure(m, s)), 1e-10);
    }
    const Mat ji = complex_structure(flat, x, cplx(0, 1)).J;
    for (int k = 0; k < m; ++k) {
      EXPECT_LT(max_abs(ji * Vec::Unit(2 * m, k) - Vec::Unit(2 * m, m + k)), 1e-12);
      EXPECT_LT(max_abs(ji * Vec::Unit(2 * m, m + k) + Vec::Unit(2 * m, k)), 1e-12);
    }
  }
}

TEST(Adapted, ComplexStructureProperties) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-1, 1);
  const auto sphere = ModelMetric::constant_curvature(2, 1.0);
  const Mat w = standard_symplectic(2);
  for (int k = 0; k < 8; ++k) {
    const auto x = with_speed(sphere, 0.4 * Vec{{d(rng), d(rng)}}, Vec{{d(rng), d(rng)}}, 0.6);
    const cplx s(d(rng), k % 2 ? 1.0 + d(rng) * 0.5 : -1.0 + d(rng) * 0.5);
    const Mat j = complex_structure(sphere, x, s).J;
    EXPECT_LT(max_abs(j * j + Mat::Identity(4, 4)), 1e-10);
    EXPECT_LT(max_abs(j.transpose() * w * j - w), 1e-10);
    const Vec xi = Vec::NullaryExpr(4, [&] { return d(rng); });
    EXPECT_GT(xi.dot(w * j * xi) * (s.imag() > 0 ? 1 : -1), 0.0);
  }
}

TEST(Adapted, ZeroOneSpaceIsTheEigenspace) {
  const auto sphere = ModelMetric::constant_curvature(2, 1.0);
  const auto x = with_speed(sphere, Vec{{0.1, 0.3}}, Vec{{2.0, 1.0}}, 0.4);
  const cplx s(0.2, 0.7);
  const CMat phi = phi_at(sphere, x, s).value;
  const CMat j = complex_structure(phi).J.cast<cplx>();
  for (int jj = 0; jj < 2; ++jj) {
    CVec w = CVec::Zero(4);
    w(2 + jj) = 1.0;
    w.head(2) = -phi.row(jj).transpose();
    EXPECT_LT((j * w + cplx(0, 1) * w).norm(), 1e-12);
  }
}

TEST(Adapted, DegenerateImaginaryPart) {
  CMat phi = CMat::Identity(2, 2) * cplx(0.3, 1.0);
  phi(1, 1) = cplx(0.3, 1e-12);
  EXPECT_THROW(complex_structure(phi), DegeneratePolarization);
}

TEST(Adapted, RealPolarizationFrames) {
  const auto flat = ModelMetric::euclidean(2);
  const GeodesicPoint x{Vec::Zero(2), Vec{{1.0, 0.0}}};
  Mat vertical = Mat::Zero(4, 2);
  vertical.bottomRows(2).setIdentity();
  EXPECT_EQ(real_polarization(flat, x, 0.0), vertical);
  Mat expected = Mat::Zero(4, 2);
  expected.topRows(2) = -Mat::Identity(2, 2);
  expected.bottomRows(2) = Mat::Identity(2, 2);
  EXPECT_LT(max_abs(real_polarization(flat, x, 1.0) - expected), 1e-10);

  const auto sphere = ModelMetric::constant_curvature(2, 1.0);
  const auto y = with_speed(sphere, Vec{{0.2, 0.0}}, Vec{{1.0, 0.5}}, 0.4);
  const Mat f = real_polarization(sphere, y, 0.7);
  EXPECT_LT(max_abs(f.transpose() * standard_symplectic(2) * f), 1e-10);
  const Mat phi0 = phi_real(sphere, y, 0.7);
  EXPECT_LT(max_abs(f.topRows(2) + phi0.transpose()), 1e-9);
}

TEST(Adapted, CanonicalMetricFlat) {
  for (int m : {1, 2, 3}) {
    const auto flat = ModelMetric::euclidean(m);
    const GeodesicPoint x{Vec::Zero(m), Vec::Ones(m)};
    for (double b : {0.5, 1.0, 2.0}) {
      const cplx s(0.3, b);
      EXPECT_NEAR(canonical_metric(flat, x, s, 1.0), std::pow(2.0, m) * std::pow(b, m), 1e-10);
      EXPECT_EQ(canonical_metric(flat, x, s, 0.0), 0.0);
    }
  }
}

TEST(Adapted, DomainCheck) {
  const auto flat = ModelMetric::euclidean(2);
  const GeodesicPoint x{Vec::Zero(2), Vec{{3.0, 4.0}}};
  const auto r = domain_check(flat, x, cplx(1, -0.5));
  EXPECT_TRUE(r.inside);
  EXPECT_NEAR(r.margin, 0.5, 1e-12);
  EXPECT_EQ(domain_check(flat, x, 2.0).status, "real-polarization branch");
  EXPECT_EQ(domain_check(flat, x, PolarizationParam::infinity()).status, "unsupported");

  const auto hyp = ModelMetric::constant_curvature(2, -1.0);
  const GeodesicPoint rest{Vec{{0.2, 0.1}}, Vec::Zero(2)};
  for (double b : {0.5, 5.0, -20.0}) EXPECT_TRUE(domain_check(hyp, rest, cplx(0.1, b)).inside);
}

TEST(Adapted, InfinityOnlyAlongZeroSection) {
  const auto sphere = ModelMetric::constant_curvature(2, 1.0);
  const Mat f = polarization_at_infinity(sphere, {Vec{{0.1, 0.2}}, Vec::Zero(2)});
  EXPECT_EQ(f.topRows(2), Mat::Identity(2, 2));
  EXPECT_EQ(f.bottomRows(2), Mat::Zero(2, 2));
  EXPECT_THROW(polarization_at_infinity(sphere, {Vec{{0.1, 0.2}}, Vec{{0.0, 1e-3}}}), Unsupported);
}
