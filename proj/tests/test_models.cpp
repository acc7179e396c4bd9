#include <random>

#include <gtest/gtest.h>

#include "adpol/models.hpp"
#include "oracles.hpp"

using namespace adpol;

namespace {

GeodesicPoint unit_speed(const ModelMetric& metric, Vec q, Vec dir) {
  dir.normalize();
  return {q, metric.frame(q) * dir};
}

}  // namespace

TEST(Models, EuclideanFlowIsStraight) {
  const auto flat = ModelMetric::euclidean(3);
  GeodesicPoint x{Vec::Random(3), Vec::Random(3)};
  const auto y = geodesic_flow(flat, x, 1.7);
  EXPECT_LT(max_abs(y.q - (x.q + 1.7 * x.p)), 1e-15);
  EXPECT_LT(max_abs(y.p - x.p), 1e-15);
}

TEST(Models, SpeedSquared) {
  EXPECT_DOUBLE_EQ(speed_squared(ModelMetric::euclidean(2), {Vec::Zero(2), Vec{{3.0, 4.0}}}), 25.0);
  const auto sphere = ModelMetric::constant_curvature(2, 1.0);
  EXPECT_EQ(speed_squared(sphere, {Vec{{0.2, 0.1}}, Vec::Zero(2)}), 0.0);
  // conformal factor at the origin of the stereographic chart is 2
  EXPECT_DOUBLE_EQ(speed_squared(sphere, {Vec::Zero(2), Vec{{0.5, 0.0}}}), 1.0);
}

TEST(Models, SphereHalfTurnReachesAntipode) {
  const auto sphere = ModelMetric::constant_curvature(2, 1.0);
  const Vec q{{0.3, -0.2}};
  const auto x = unit_speed(sphere, q, Vec{{1.0, 2.0}});
  for (auto method : {FlowMethod::automatic, FlowMethod::numeric}) {
    const auto y = geodesic_flow(sphere, x, oracle::pi, method);
    EXPECT_LT(max_abs(y.q - oracle::stereographic_antipode(q)), 1e-9);
    EXPECT_NEAR(speed_squared(sphere, y), 1.0, 1e-9);
  }
}

TEST(Models, ClosedFormAndNumericFlowsAgree) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-0.4, 0.4);
  for (double c : {1.0, -1.0, 0.5}) {
    const auto metric = ModelMetric::constant_curvature(3, c);
    for (int k = 0; k < 5; ++k) {
      const GeodesicPoint x{Vec{{d(rng), d(rng), d(rng)}}, Vec{{d(rng), d(rng), d(rng)}}};
      const auto a = geodesic_flow_with_frame(metric, x, 0.8, FlowMethod::automatic);
      const auto b = geodesic_flow_with_frame(metric, x, 0.8, FlowMethod::numeric);
      EXPECT_LT(max_abs(a.point.q - b.point.q), 1e-10);
      EXPECT_LT(max_abs(a.point.p - b.point.p), 1e-10);
      EXPECT_LT(max_abs(a.frame - b.frame), 1e-10);
      // the transported frame stays orthonormal
      const Mat g = metric.metric_tensor(a.point.q);
      EXPECT_LT(max_abs(a.frame.transpose() * g * a.frame - Mat::Identity(3, 3)), 1e-10);
    }
  }
}

TEST(Models, ClairautConstantIsConserved) {
  for (auto profile : {Profile::torus(2.0, 1.0), Profile::catenoid(1.0), Profile::sphere(1.0)}) {
    const auto metric = ModelMetric::revolution(profile);
    const double u0 = profile.kind() == Profile::Kind::sphere ? 1.2 : 0.3;
    const GeodesicPoint x{Vec{{u0, 0.4}}, Vec{{0.3, 0.25}}};
    auto clairaut = [&](const GeodesicPoint& y) {
      const double r = profile.r(y.q(0));
      return r * r * y.p(1);
    };
    for (double t : {0.5, 1.5, 3.0}) {
      const auto y = geodesic_flow(metric, x, t);
      EXPECT_NEAR(clairaut(y), clairaut(x), 1e-10) << profile.name() << " t=" << t;
      EXPECT_NEAR(speed_squared(metric, y), speed_squared(metric, x), 1e-10);
    }
  }
}

TEST(Models, ChristoffelMatchesMetricDerivative) {
  // Gamma_kij = 1/2 (d_i g_kj + d_j g_ki - d_k g_ij), lowered with g
  const std::vector<std::pair<ModelMetric, Vec>> cases = {
      {ModelMetric::constant_curvature(3, 1.0), Vec{{0.2, -0.1, 0.3}}},
      {ModelMetric::constant_curvature(2, -2.0), Vec{{0.1, 0.2}}},
      {ModelMetric::revolution(Profile::torus(3.0, 1.0)), Vec{{0.4, 1.0}}},
  };
  for (const auto& [metric, q] : cases) {
    const int m = metric.dim();
    const auto gamma = metric.christoffel(q);
    const auto dg = metric.metric_derivative(q);
    const Mat g = metric.metric_tensor(q);
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          double lowered = 0;
          for (int l = 0; l < m; ++l) lowered += g(k, l) * gamma[l](i, j);
          const double expected = 0.5 * (dg[i](k, j) + dg[j](k, i) - dg[k](i, j));
          EXPECT_NEAR(lowered, expected, 1e-12) << metric.name();
        }
  }
}

TEST(Models, MetricDerivativeMatchesFiniteDifferences) {
  const auto metric = ModelMetric::constant_curvature(2, 1.0);
  const Vec q{{0.3, -0.4}};
  const auto dg = metric.metric_derivative(q);
  const double h = 1e-6;
  for (int k = 0; k < 2; ++k) {
    Vec qp = q, qm = q;
    qp(k) += h;
    qm(k) -= h;
    EXPECT_LT(max_abs((metric.metric_tensor(qp) - metric.metric_tensor(qm)) / (2 * h) - dg[k]), 1e-8);
  }
}

TEST(Models, CurvatureOperator) {
  const Vec q{{0.1, 0.2}};
  const GeodesicPoint x{q, Vec{{0.2, -0.1}}};
  const auto flat = curvature_along(ModelMetric::euclidean(2), x);
  EXPECT_EQ(max_abs(flat.evaluate(0.5).real()), 0.0);

  for (double c : {1.0, -1.0}) {
    const auto metric = ModelMetric::constant_curvature(2, c);
    const double v = speed_squared(metric, x);
    const CMat R = curvature_along(metric, x).evaluate(cplx(0.3, 0.2));
    Eigen::SelfAdjointEigenSolver<Mat> eig(R.real());
    Vec expected{{0.0, c * v}};
    std::sort(expected.data(), expected.data() + 2);
    EXPECT_NEAR(eig.eigenvalues()(0), expected(0), 1e-12);
    EXPECT_NEAR(eig.eigenvalues()(1), expected(1), 1e-12);
  }
}

TEST(Models, RevolutionSphereHasUnitCurvature) {
  // the round profile continued in complex time keeps K = 1
  const auto metric = ModelMetric::revolution(Profile::sphere(1.0));
  const GeodesicPoint x{Vec{{1.1, 0.0}}, Vec{{0.3, 0.5}}};
  const auto R = curvature_along(metric, x);
  const CMat r0 = R.evaluate(0.0);
  const CMat r1 = R.evaluate(cplx(0.2, 0.7));
  EXPECT_LT(max_abs(CMat(r1 - r0)), 1e-12);

  const auto torus = ModelMetric::revolution(Profile::torus(2.0, 1.0));
  const auto Rt = curvature_along(torus, GeodesicPoint{Vec{{0.3, 0.0}}, Vec{{0.5, 0.1}}});
  // K = cos(u) / (2 + cos(u)) at the start
  const double k0 = std::cos(0.3) / (2.0 + std::cos(0.3));
  const double v = 0.25 + 0.01 * std::pow(2.0 + std::cos(0.3), 2);
  EXPECT_NEAR(Rt.evaluate(0.0).real().trace(), k0 * v, 1e-12);
}

TEST(Models, ChartExitAndValidation) {
  const auto hyp = ModelMetric::constant_curvature(2, -1.0);
  EXPECT_FALSE(hyp.in_chart(Vec{{1.0, 0.1}}));
  EXPECT_THROW(geodesic_flow(hyp, {Vec{{1.2, 0.0}}, Vec{{0.1, 0.0}}}, 1.0), ChartExit);
  EXPECT_THROW(ModelMetric::constant_curvature(2, 0.0), InvalidArgument);
  EXPECT_THROW(Profile::torus(1.0, 2.0), InvalidArgument);
  EXPECT_THROW(geodesic_flow(hyp, {Vec::Zero(3), Vec::Zero(3)}, 1.0), InvalidArgument);
}
