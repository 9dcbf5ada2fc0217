#include <gtest/gtest.h>

#include <numbers>

#include "helpers.hpp"
#include "ksd/shapespace.hpp"
#include "oracles.hpp"

using namespace ksd;
using namespace testing_util;

namespace {
// Pre-shape Phi-orthogonal to p.
PreShape orthogonal_to(const PreShape& p, std::mt19937_64& rng) {
  const MetricPtr& m = p.metric();
  CVector v = center(random_vector(m->dim(), rng), *m);
  v -= m->inner(p.vector(), v) * p.vector();
  return preshape(v, m);
}
std::vector<MetricPtr> metrics() { return {Metric::landmarks(7), Metric::bspline_closed(8)}; }
}  // namespace

TEST(OptimalAlignment, Examples) {
  std::mt19937_64 rng(1);
  for (const MetricPtr& m : metrics()) {
    const PreShape z = random_preshape(m, rng);
    const Alignment same = optimal_alignment(z, z);
    EXPECT_NEAR(std::abs(same.factor - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(same.scaling, 1.0, 1e-12);
    EXPECT_TRUE(same.angle < 1e-12 || same.angle > 2 * std::numbers::pi - 1e-12);
    const Alignment rot = optimal_alignment(z, z.rotated(std::numbers::pi / 3));
    EXPECT_NEAR(std::abs(rot.factor - std::polar(1.0, std::numbers::pi / 3)), 0.0, 1e-12);
    EXPECT_NEAR(rot.angle, std::numbers::pi / 3, 1e-12);
    const Alignment dec = optimal_alignment(z, orthogonal_to(z, rng));
    EXPECT_LT(dec.scaling, 1e-12);
  }
  const MetricPtr l = Metric::landmarks(4);
  CVector a(4), b(4);
  a << 1.0, -1.0, 0.0, 0.0;
  b << 0.0, 0.0, 1.0, -1.0;
  const Alignment exact = optimal_alignment(preshape(a, l), preshape(b, l));
  EXPECT_TRUE(exact.decorrelated);
  EXPECT_EQ(exact.angle, 0.0);
  EXPECT_EQ(exact.scaling, 0.0);
}

TEST(OptimalAlignment, FactorBeatsSampledScalings) {
  std::mt19937_64 rng(2);
  for (const MetricPtr& m : metrics()) {
    const PreShape z = random_preshape(m, rng), w = random_preshape(m, rng);
    const Alignment al = optimal_alignment(z, w);
    const double best = m->norm(CVector(al.factor * z.vector() - w.vector()));
    for (int t = 0; t < 200; ++t) {
      const cplx c = random_complex(rng);
      EXPECT_LE(best, m->norm(CVector(c * z.vector() - w.vector())) + 1e-14);
    }
    EXPECT_LE(al.scaling, 1.0 + 1e-15);
  }
}

TEST(OptimalAlignment, MetricMismatch) {
  std::mt19937_64 rng(3);
  EXPECT_THROW(optimal_alignment(random_preshape(Metric::landmarks(8), rng), random_preshape(Metric::bspline_closed(8), rng)),
               UsageError);
}

TEST(Distances, Examples) {
  std::mt19937_64 rng(4);
  for (const MetricPtr& m : metrics()) {
    const PreShape z = random_preshape(m, rng);
    EXPECT_NEAR(dist_full(z, z.rotated(cplx(0, 1))), 0.0, 1e-7);
    EXPECT_NEAR(dist_partial(z, z.rotated(1.234)), 0.0, 1e-7);
    EXPECT_NEAR(dist_geodesic(z, z), 0.0, 1e-7);
    const PreShape o = orthogonal_to(z, rng);
    EXPECT_NEAR(dist_full(z, o), 1.0, 1e-12);
    EXPECT_NEAR(dist_partial(z, o), std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(dist_geodesic(z, o), std::numbers::pi / 2, 1e-12);
  }
}

TEST(Distances, ClosedFormsAgainstDirectResiduals) {
  std::mt19937_64 rng(5);
  for (const MetricPtr& m : metrics()) {
    for (int t = 0; t < 20; ++t) {
      const PreShape z = random_preshape(m, rng), w = random_preshape(m, rng);
      const cplx a = m->inner(z.vector(), w.vector());
      EXPECT_NEAR(dist_full(z, w), m->norm(CVector(a * z.vector() - w.vector())), 1e-10);
      EXPECT_NEAR(dist_partial(z, w), m->norm(CVector(a / std::abs(a) * z.vector() - w.vector())), 1e-10);
    }
  }
}

TEST(Distances, GridOracles) {
  std::mt19937_64 rng(6);
  for (const MetricPtr& m : metrics()) {
    for (int t = 0; t < 2; ++t) {
      const PreShape z = random_preshape(m, rng), w = random_preshape(m, rng);
      const CMatrix& phi = m->phi().matrix();
      EXPECT_NEAR(dist_full(z, w), oracle::grid_full_distance(z.vector(), w.vector(), phi), 1e-4);
      EXPECT_NEAR(dist_partial(z, w), oracle::grid_partial_distance(z.vector(), w.vector(), phi), 1e-5);
    }
  }
}

TEST(Distances, IdentitiesSymmetryAndRotationInvariance) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(0.0, 2 * std::numbers::pi);
  for (const MetricPtr& m : metrics()) {
    for (int t = 0; t < 100; ++t) {
      const PreShape z = random_preshape(m, rng), w = random_preshape(m, rng);
      const double df = dist_full(z, w), dp = dist_partial(z, w), rho = dist_geodesic(z, w);
      EXPECT_NEAR(dp * dp, 2.0 - 2.0 * std::sqrt(1.0 - df * df), 1e-10);
      EXPECT_NEAR(df, std::sin(rho), 1e-12);
      EXPECT_NEAR(dp, 2.0 * std::sin(rho / 2.0), 1e-10);
      const PreShape zr = z.rotated(ang(rng)), wr = w.rotated(ang(rng));
      EXPECT_NEAR(dist_full(zr, wr), df, 1e-12);
      EXPECT_NEAR(dist_partial(zr, wr), dp, 1e-12);
      EXPECT_NEAR(dist_geodesic(zr, wr), rho, 1e-12);
      EXPECT_NEAR(dist_full(w, z), df, 1e-12);
      EXPECT_NEAR(dist_partial(w, z), dp, 1e-12);
      EXPECT_NEAR(dist_geodesic(w, z), rho, 1e-12);
      const Alignment al = optimal_alignment(z, w);
      EXPECT_NEAR(std::abs(std::polar(1.0, al.angle) - al.factor / al.scaling), 0.0, 1e-12);
    }
  }
}

TEST(Geodesic, EndpointsAndMidpoint) {
  std::mt19937_64 rng(8);
  for (const MetricPtr& m : metrics()) {
    for (int t = 0; t < 10; ++t) {
      const PreShape z = random_preshape(m, rng), w = random_preshape(m, rng);
      const Alignment al = optimal_alignment(z, w);
      const CVector zt = std::polar(1.0, al.angle) * z.vector();
      EXPECT_LT((geodesic_path(z, w, 0.0).point.vector() - zt).norm(), 1e-10);
      EXPECT_LT((geodesic_path(z, w, 1.0).point.vector() - w.vector()).norm(), 1e-10);
      const PreShape mid = geodesic_path(z, w, 0.5).point;
      EXPECT_NEAR(m->norm(mid.vector()), 1.0, 1e-12);
      EXPECT_NEAR(dist_geodesic(z, mid), dist_geodesic(z, w) / 2.0, 1e-9);
      for (double s : {0.1, 0.33, 0.9}) {
        const PreShape p = geodesic_path(z, w, s).point;
        EXPECT_LT(std::abs(m->inner(m->shift(), p.vector())), 1e-10);
        EXPECT_NEAR(m->norm(p.vector()), 1.0, 1e-10);
        EXPECT_NEAR(dist_geodesic(z, p), s * dist_geodesic(z, w), 1e-9);
      }
    }
  }
}

TEST(Geodesic, SameShapeDecorrelatedAndBadParameter) {
  std::mt19937_64 rng(9);
  const MetricPtr m = Metric::landmarks(6);
  const PreShape z = random_preshape(m, rng);
  const GeodesicPoint same = geodesic_path(z, z.rotated(0.7), 0.4);
  EXPECT_LT(dist_full(same.point, z), 1e-7);
  const GeodesicPoint far = geodesic_path(z, orthogonal_to(z, rng), 0.5);
  EXPECT_FALSE(far.unique);
  EXPECT_NEAR(m->norm(far.point.vector()), 1.0, 1e-12);
  EXPECT_THROW(geodesic_path(z, z, 1.5), UsageError);
}

TEST(FrechetMean, RotatedCopies) {
  std::mt19937_64 rng(10);
  for (const MetricPtr& m : metrics()) {
    const PreShape p = random_preshape(m, rng);
    std::vector<PreShape> data;
    for (int k = 0; k < 6; ++k) data.push_back(p.rotated(0.9 * k + 0.1));
    const FrechetMean fm = frechet_mean(data);
    EXPECT_LE(dist_full(fm.mean, p), 1e-9);
    EXPECT_TRUE(fm.unique);
  }
}

TEST(FrechetMean, TieIsFlagged) {
  std::mt19937_64 rng(11);
  const MetricPtr m = Metric::landmarks(5);
  const PreShape p = random_preshape(m, rng);
  const FrechetMean fm = frechet_mean({p, orthogonal_to(p, rng)});
  EXPECT_FALSE(fm.unique);
}

TEST(FrechetMean, MatchesGradientOracle) {
  std::mt19937_64 rng(12);
  const MetricPtr m = Metric::landmarks(4);
  for (int trial = 0; trial < 3; ++trial) {
    const std::vector<PreShape> data = random_preshapes(m, 3, rng);
    std::vector<oracle::CVec> raw;
    for (const PreShape& p : data) raw.push_back(p.vector());
    const FrechetMean fm = frechet_mean(data);
    double value = 0.0;
    for (const PreShape& p : data) value += std::norm(m->inner(fm.mean.vector(), p.vector()));
    EXPECT_NEAR(value, oracle::frechet_objective_max(raw, 50, rng), 1e-6);
  }
}
