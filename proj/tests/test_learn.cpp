#include <gtest/gtest.h>

#include "helpers.hpp"
#include "ksd/learn.hpp"
#include "ksd/shapespace.hpp"

using namespace ksd;
using namespace testing_util;

namespace {

std::vector<PreShape> columns_as_preshapes(const CMatrix& q, const MetricPtr& m) {
  std::vector<PreShape> out;
  for (Index j = 0; j < q.cols(); ++j) out.push_back(PreShape::verified(q.col(j), m));
  return out;
}

LearnConfig config(Index j, Index n0, Index t, std::uint64_t seed = 0) {
  LearnConfig c;
  c.atoms = j;
  c.sparsity = n0;
  c.iterations = t;
  c.seed = seed;
  c.threads = 1;
  return c;
}

// Minimizer of sum_k |z_k - D a_k|_Phi^2 by brute-force least squares on
// vec(sqrt(Phi) D A) = (A^T kron sqrt(Phi)) vec(D).
CMatrix weighted_ls_dictionary(const CMatrix& z, const CMatrix& a, const MetricPtr& m) {
  const CMatrix root = m->roots().sqrt.matrix();
  const Index n = z.rows(), j = a.rows(), k = a.cols();
  CMatrix kron(n * k, n * j);
  for (Index c = 0; c < k; ++c)
    for (Index r = 0; r < j; ++r) kron.block(c * n, r * n, n, n) = a(r, c) * root;
  const CMatrix rz = root * z;
  const CVector rhs = Eigen::Map<const CVector>(rz.data(), n * k);
  const CVector d = kron.completeOrthogonalDecomposition().solve(rhs);
  return Eigen::Map<const CMatrix>(d.data(), n, j);
}

}  // namespace

TEST(ModUpdate, Examples) {
  std::mt19937_64 rng(1);
  const CMatrix z = random_matrix(6, 4, rng);
  EXPECT_LT(rel_diff(mod_update(z, CMatrix::Identity(4, 4)), z), 1e-12);
  EXPECT_EQ(mod_update(z, CMatrix::Zero(3, 4)).norm(), 0.0);
  EXPECT_THROW(mod_update(z, CMatrix::Identity(3, 3)), UsageError);
}

TEST(ModUpdate, StationarityAndMetricIndependence) {
  std::mt19937_64 rng(2);
  const CMatrix z = random_matrix(6, 8, rng);
  const CMatrix a = random_matrix(3, 8, rng);
  const CMatrix d = mod_update(z, a);
  const double scale = std::max((z * a.adjoint()).norm(), 1.0);
  EXPECT_LE((d * a * a.adjoint() - z * a.adjoint()).norm(), 1e-8 * scale);
  for (const MetricPtr& m : {Metric::landmarks(6), Metric::bspline_closed(6)}) {
    EXPECT_LT(rel_diff(weighted_ls_dictionary(z, a, m), d), 1e-10) << to_string(m->kind());
  }
}

TEST(Renormalize, UnchangedWhenUnitAndUsed) {
  std::mt19937_64 rng(3);
  const MetricPtr m = Metric::bspline_closed(8);
  const auto data = random_preshapes(m, 5, rng);
  CMatrix d(8, 2);
  d << data[0].vector(), data[1].vector();
  auto r = make_rng(0, 1);
  std::size_t replaced = 99;
  const Dictionary out = renormalize_and_replace(d, data, {1, 2}, 0, r, &replaced);
  EXPECT_EQ(replaced, 0u);
  EXPECT_LT(rel_diff(out.atoms(), d), 1e-14);
}

TEST(Renormalize, ZeroAndUnusedColumnsReplacedDeterministically) {
  std::mt19937_64 rng(4);
  const MetricPtr m = Metric::bspline_closed(8);
  const auto data = random_preshapes(m, 5, rng);
  CMatrix d(8, 3);
  d << 3.0 * data[0].vector(), CVector::Zero(8), data[1].vector();
  auto run = [&] {
    auto r = make_rng(7, 1);
    std::size_t replaced = 0;
    Dictionary out = renormalize_and_replace(d, data, {1, 4, 0}, 0, r, &replaced);
    EXPECT_EQ(replaced, 2u);
    return out;
  };
  const Dictionary a = run();
  EXPECT_LT(rel_diff(a.atoms().col(0), data[0].vector()), 1e-14);
  for (Index j : {1, 2}) {
    bool found = false;
    for (const PreShape& p : data) found = found || a.atoms().col(j) == p.vector();
    EXPECT_TRUE(found) << j;
  }
  EXPECT_NE(a.atoms().col(1), a.atoms().col(2));
  EXPECT_EQ(a.atoms(), run().atoms());

  auto r = make_rng(0, 1);
  const std::vector<PreShape> tiny(data.begin(), data.begin() + 1);
  EXPECT_THROW(renormalize_and_replace(CMatrix::Zero(8, 2), tiny, {0, 0}, 0, r), DataError);
}

TEST(Learn, RejectsBadConfig) {
  std::mt19937_64 rng(5);
  const MetricPtr m = Metric::landmarks(6);
  const auto data = random_preshapes(m, 4, rng);
  EXPECT_THROW(learn({}, config(2, 1, 1)), DataError);
  EXPECT_THROW(learn(data, config(2, 3, 1)), UsageError);
  EXPECT_THROW(learn(data, config(2, 1, 0)), UsageError);
  const LearnResult few = learn(data, config(6, 1, 1));
  EXPECT_FALSE(few.report.warnings.empty());
}

TEST(Learn, OrthonormalDataIsFixedPoint) {
  std::mt19937_64 rng(6);
  const MetricPtr m = Metric::bspline_closed(12);
  const CMatrix q = orthonormal_preshapes(m, 4, rng);
  const auto data = columns_as_preshapes(q, m);
  const LearnResult r = learn(data, config(4, 1, 3), Dictionary(q, m));
  EXPECT_LT(r.report.loss_history.front(), 1e-20);
  EXPECT_LT(r.report.final_rmse, 1e-10);
  EXPECT_LT(rel_diff(r.dictionary.atoms(), q), 1e-12);
  EXPECT_EQ(r.report.atom_replacements, 0u);
}

TEST(Learn, SingleDatumSingleAtom) {
  std::mt19937_64 rng(7);
  const MetricPtr m = Metric::landmarks(10);
  const PreShape z = random_preshape(m, rng);
  const LearnResult r = learn({z}, config(1, 1, 5));
  EXPECT_LE(r.report.final_rmse, 1e-9);
  EXPECT_LT(dist_full(z, r.dictionary.atom(0)), 1e-9);
}

TEST(Learn, PlantedDictionaryStaysExact) {
  std::mt19937_64 rng(8);
  const MetricPtr m = Metric::bspline_closed(16);
  const CMatrix q = orthonormal_preshapes(m, 6, rng);
  std::vector<PreShape> data;
  for (int k = 0; k < 30; ++k) {
    const Index a = k % 6, b = (k + 1 + k / 6) % 6;
    const CVector v = random_complex(rng) * q.col(a) + random_complex(rng) * q.col(b == a ? (a + 1) % 6 : b);
    data.push_back(preshape(v, m));
  }
  const LearnResult r = learn(data, config(6, 2, 10), Dictionary(q, m));
  ASSERT_EQ(r.report.loss_history.size(), 11u);
  for (double e : r.report.loss_history) EXPECT_LE(e, 1e-12);
  EXPECT_LE(r.report.final_rmse, 1e-6);
}

TEST(Learn, ReportIsConsistent) {
  std::mt19937_64 rng(9);
  const MetricPtr m = Metric::bspline_closed(10);
  const auto data = random_preshapes(m, 40, rng);
  const LearnResult r = learn(data, config(6, 2, 8, 3));
  ASSERT_EQ(r.report.loss_history.size(), 9u);
  const LossRmse lr = loss_and_rmse(data, r.dictionary, r.codes);
  EXPECT_NEAR(lr.rmse, r.report.final_rmse, 1e-9);
  EXPECT_NEAR(lr.energy, r.report.loss_history.back(), 1e-9);
  std::size_t used = 0;
  for (std::size_t u : r.dictionary.usage()) used += u;
  std::size_t support = 0;
  for (const SparseCode& c : r.codes) support += c.support.size();
  EXPECT_EQ(used, support);
  for (Index j = 0; j < r.dictionary.size(); ++j) (void)r.dictionary.atom(j);
}

TEST(Learn, DeterministicAcrossThreadCounts) {
  std::mt19937_64 rng(10);
  const MetricPtr m = Metric::bspline_closed(10);
  const auto data = random_preshapes(m, 60, rng);
  LearnConfig one = config(8, 3, 6, 11);
  LearnConfig many = one;
  many.threads = 4;
  const LearnResult a = learn(data, one);
  const LearnResult b = learn(data, many);
  EXPECT_EQ(a.dictionary.atoms(), b.dictionary.atoms());
  EXPECT_EQ(a.report.loss_history, b.report.loss_history);
  EXPECT_EQ(a.report.final_rmse, b.report.final_rmse);
  EXPECT_EQ(a.report.atom_replacements, b.report.atom_replacements);
  const LearnResult c = learn(data, config(8, 3, 6, 12));
  EXPECT_NE(a.dictionary.atoms(), c.dictionary.atoms());
}

TEST(Learn, BatchModeRefreshesSubsets) {
  std::mt19937_64 rng(11);
  const MetricPtr m = Metric::landmarks(12);
  const auto data = random_preshapes(m, 40, rng);
  LearnConfig cfg = config(6, 2, 12, 5);
  cfg.batch_size = 10;
  const LearnResult r = learn(data, cfg);
  ASSERT_EQ(r.report.loss_history.size(), 13u);
  for (const SparseCode& c : r.codes) EXPECT_FALSE(c.empty());
  EXPECT_NEAR(loss_and_rmse(data, r.dictionary, r.codes).rmse, r.report.final_rmse, 1e-9);
  // only a quarter of the codes exist after the first pass
  EXPECT_GT(r.report.loss_history.front(), 20.0);
  EXPECT_EQ(learn(data, cfg).dictionary.atoms(), r.dictionary.atoms());
}

TEST(ModLearner, CodingAndModStepsDoNotIncreaseLoss) {
  std::mt19937_64 rng(12);
  const MetricPtr m = Metric::bspline_closed(12);
  const auto data = random_preshapes(m, 50, rng);
  LearnConfig cfg = config(8, 3, 1, 2);
  ModLearner<cplx> learner(detail::stack_columns(data), m->phi().matrix(), cfg);
  learner.init_from_data();
  learner.code_all(false);
  for (int it = 0; it < 6; ++it) {
    const double before_mod = learner.energy();
    const CMatrix next = learner.mod_step();
    EXPECT_LE(learner.energy(next), before_mod + 1e-10);
    const std::vector<std::size_t> u = learner.usage();
    learner.renormalize_and_replace(next, &u);
    const double before_code = learner.energy();
    learner.code_all(true);
    EXPECT_LE(learner.energy(), before_code + 1e-10) << it;
  }
}

TEST(ModLearner, EnergyMatchesMetricSummation) {
  std::mt19937_64 rng(13);
  const MetricPtr m = Metric::bspline_closed(8);
  const auto data = random_preshapes(m, 10, rng);
  ModLearner<cplx> learner(detail::stack_columns(data), m->phi().matrix(), config(4, 2, 1));
  learner.init_from_data();
  learner.code_all(false);
  const Dictionary dict(learner.dictionary(), m);
  EXPECT_NEAR(learner.energy(), loss_and_rmse(data, dict, learner.codes()).energy, 1e-12);
}

TEST(LossRmse, Examples) {
  std::mt19937_64 rng(14);
  const MetricPtr m = Metric::bspline_closed(8);
  const auto data = random_preshapes(m, 6, rng);
  CMatrix d(8, 2);
  d << data[0].vector(), data[1].vector();
  const Dictionary dict(d, m);
  const LossRmse empty = loss_and_rmse(data, dict, std::vector<SparseCode>(6));
  EXPECT_NEAR(empty.energy, 6.0, 1e-12);
  EXPECT_NEAR(empty.rmse, 1.0, 1e-12);

  const std::vector<SparseCode> perfect{{{0}, {1.0}, 0.0}, {{1}, {1.0}, 0.0}};
  const std::vector<PreShape> two(data.begin(), data.begin() + 2);
  const LossRmse zero = loss_and_rmse(two, dict, perfect);
  EXPECT_EQ(zero.energy, 0.0);
  EXPECT_EQ(zero.rmse, 0.0);

  std::vector<SparseCode> codes;
  double e = 0.0;
  for (const PreShape& z : data) {
    SparseCode c{{1, 0}, {random_complex(rng), random_complex(rng)}, 0.0};
    const CVector r = z.vector() - c.coefficients[0] * d.col(1) - c.coefficients[1] * d.col(0);
    e += m->inner(r, r).real();
    codes.push_back(c);
  }
  const LossRmse lr = loss_and_rmse(data, dict, codes);
  EXPECT_NEAR(lr.energy, e, 1e-10);
  EXPECT_NEAR(lr.rmse, std::sqrt(e / 6.0), 1e-10);
  EXPECT_THROW(loss_and_rmse({}, dict, {}), UsageError);
  EXPECT_THROW(loss_and_rmse(data, dict, codes.empty() ? codes : std::vector<SparseCode>(2)), UsageError);
}

TEST(Reconstruct, Examples) {
  std::mt19937_64 rng(15);
  const MetricPtr m = Metric::bspline_closed(10);
  const auto data = random_preshapes(m, 30, rng);
  const LearnResult r = learn(data, config(5, 2, 5));
  const Reconstruction one = reconstruct(r.dictionary, SparseCode{{3}, {1.0}, 0.0});
  EXPECT_LT(rel_diff(one.raw, r.dictionary.atoms().col(3)), 1e-15);
  ASSERT_TRUE(one.preshape);
  EXPECT_LT(rel_diff(one.preshape->vector(), r.dictionary.atoms().col(3)), 1e-12);
  const Reconstruction none = reconstruct(r.dictionary, SparseCode{});
  EXPECT_EQ(none.raw.norm(), 0.0);
  EXPECT_FALSE(none.preshape);
  EXPECT_THROW(reconstruct(r.dictionary, SparseCode{{7}, {1.0}, 0.0}), UsageError);
  for (std::size_t k = 0; k < data.size(); ++k) {
    const Reconstruction rec = reconstruct(r.dictionary, r.codes[k]);
    ASSERT_TRUE(rec.preshape);
    EXPECT_NEAR(dist_full(data[k], *rec.preshape), m->norm(CVector(data[k].vector() - rec.raw)), 1e-9);
  }
}
