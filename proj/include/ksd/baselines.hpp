#pragma once

// Comparison methods: complex PCA and the align-first dictionary, which
// rotates every pre-shape along a reference and then learns with real
// weights.

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ksd/configspace.hpp"
#include "ksd/dictionary.hpp"
#include "ksd/error.hpp"
#include "ksd/learn.hpp"
#include "ksd/linalg.hpp"
#include "ksd/ormp.hpp"
#include "ksd/parallel.hpp"
#include "ksd/shapespace.hpp"

namespace ksd {

struct PcaModel {
  CMatrix modes;            ///< Phi-orthonormal columns w_1..w_J
  RVector eigenvalues;      ///< lambda_1 >= ... >= lambda_J >= 0
  CVector dataset_mean;     ///< coefficient-wise mean that was subtracted (zero if kept)
  bool mean_subtracted = true;
  double total_energy = 0.0;  ///< sum_k |z_k|^2 after mean handling
  Index samples = 0;
  MetricPtr metric;

  /// Loss of the best n0-term approximation: total energy minus the top n0
  /// eigenvalues.
  double loss(Index n0) const {
    if (n0 < 0 || n0 > eigenvalues.size()) throw UsageError("pca loss: mode count out of range");
    return std::max(0.0, total_energy - eigenvalues.head(n0).sum());
  }
  double rmse(Index n0) const { return std::sqrt(loss(n0) / static_cast<double>(samples)); }
};

/// Complex PCA: top-J eigenvectors of Z Z* Phi.
inline PcaModel complex_pca(const std::vector<CVector>& data, const MetricPtr& metric, Index num_modes,
                            bool subtract_mean = true) {
  if (data.empty()) throw UsageError("complex_pca needs at least one configuration");
  if (!metric) throw UsageError("complex_pca needs a metric");
  const Index n = metric->dim();
  if (num_modes < 1 || num_modes > n) {
    throw UsageError("complex_pca: number of modes must lie in [1, " + std::to_string(n) + "]");
  }
  const Index k = static_cast<Index>(data.size());
  CMatrix z(n, k);
  for (Index i = 0; i < k; ++i) {
    detail::check_dims(data[static_cast<std::size_t>(i)].size(), n, "complex_pca");
    z.col(i) = data[static_cast<std::size_t>(i)];
  }
  PcaModel model;
  model.metric = metric;
  model.samples = k;
  model.mean_subtracted = subtract_mean;
  model.dataset_mean = subtract_mean ? CVector(z.rowwise().mean()) : CVector(CVector::Zero(n));
  z.colwise() -= model.dataset_mean;
  for (Index i = 0; i < k; ++i) model.total_energy += metric->norm2(z.col(i));

  const CMatrix op = z * (z.adjoint() * metric->phi().matrix());
  const EigenPairs eig = herm_eig(op, metric->phi(), metric->roots());
  model.modes = eig.vectors.leftCols(num_modes);
  model.eigenvalues = eig.values.head(num_modes).cwiseMax(0.0);
  return model;
}

/// Best n0-term approximation sum_{j <= n0} (w_j* Phi z) w_j.
inline CVector pca_code(const CVector& z, const PcaModel& model, Index n0) {
  if (n0 < 0 || n0 > model.modes.cols()) throw UsageError("pca_code: more modes requested than available");
  detail::check_dims(z.size(), model.modes.rows(), "pca_code");
  CVector out = CVector::Zero(z.size());
  for (Index j = 0; j < n0; ++j) out += model.metric->inner(model.modes.col(j), z) * model.modes.col(j);
  return out;
}

struct AlignedSet {
  std::vector<PreShape> shapes;
  std::vector<bool> decorrelated;  ///< input was Phi-orthogonal to the reference and left as is
};

/// Rotates every pre-shape optimally along `reference`.
inline AlignedSet align_dataset(const std::vector<PreShape>& data, const PreShape& reference) {
  AlignedSet out;
  out.shapes.reserve(data.size());
  out.decorrelated.reserve(data.size());
  for (const PreShape& z : data) {
    const Alignment al = optimal_alignment(z, reference);
    out.decorrelated.push_back(al.decorrelated);
    out.shapes.push_back(al.decorrelated ? z : z.rotated(al.factor / al.scaling));
  }
  return out;
}

namespace detail {

// Columns stack_real(sqrt(Phi) z): the Euclidean product of two columns is
// Re(z* Phi w).
inline RMatrix to_real_space(const std::vector<CVector>& z, const Metric& metric) {
  const bool euclid = metric.phi().is_identity();
  RMatrix x(2 * metric.dim(), static_cast<Index>(z.size()));
  for (std::size_t k = 0; k < z.size(); ++k) {
    ksd::detail::check_dims(z[k].size(), metric.dim(), "real embedding");
    x.col(static_cast<Index>(k)) = stack_real(euclid ? z[k] : CVector(metric.roots().sqrt.matrix() * z[k]));
  }
  return x;
}

inline RMatrix to_real_space(const std::vector<PreShape>& data, const Metric& metric) {
  std::vector<CVector> z;
  z.reserve(data.size());
  for (const PreShape& p : data) z.push_back(p.vector());
  return to_real_space(z, metric);
}

}  // namespace detail

struct AlignFirstOptions {
  bool align = true;                        ///< test hook: skip the rotation step
  std::optional<std::size_t> reference_index;  ///< test hook: fixed reference instead of the Frechet mean
};

struct AlignFirstResult {
  Dictionary dictionary;              ///< atoms mapped back to pre-shapes
  std::vector<RealSparseCode> codes;  ///< real weights
  LearnReport report;                 ///< loss E' measured with |.|_Phi on the aligned data
  PreShape reference;
  std::vector<PreShape> aligned;
};

/// Align-first baseline. The aligned data are mapped through sqrt(Phi) and
/// stacked into R^{2N}, where the Euclidean product matches Re(z* Phi w);
/// MOD and real ORMP run there and the atoms are mapped back.
inline AlignFirstResult align_first_learn(const std::vector<PreShape>& data, const LearnConfig& cfg,
                                          const AlignFirstOptions& options = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  if (data.empty()) throw DataError("learning needs a nonempty dataset");
  const MetricPtr& metric = data.front().metric();
  const Index n = metric->dim();

  AlignFirstResult out;
  if (options.reference_index) {
    if (*options.reference_index >= data.size()) throw UsageError("reference index out of range");
    out.reference = data[*options.reference_index];
  } else {
    FrechetMean fm = frechet_mean(data);
    if (!fm.unique) out.report.warnings.push_back("Frechet mean is not unique; using one representative");
    out.reference = fm.mean;
  }
  out.aligned = options.align ? align_dataset(data, out.reference).shapes : data;
  if (static_cast<Index>(data.size()) < cfg.atoms) {
    out.report.warnings.push_back("fewer data (" + std::to_string(data.size()) + ") than atoms (" +
                                  std::to_string(cfg.atoms) + ")");
  }

  const CMatrix& inv_root = metric->roots().inv_sqrt.matrix();
  const bool euclid = metric->phi().is_identity();
  ModLearner<double> learner(detail::to_real_space(out.aligned, *metric), std::nullopt, cfg);
  learner.init_from_data();
  detail::run_iterations(learner, cfg, out.report);

  const RMatrix& dx = learner.dictionary();
  CMatrix atoms(n, dx.cols());
  for (Index j = 0; j < dx.cols(); ++j) {
    const CVector a = unstack_real(dx.col(j));
    atoms.col(j) = euclid ? a : CVector(inv_root * a);
  }
  out.dictionary = Dictionary(std::move(atoms), metric, 1e-9);
  out.dictionary.set_usage(learner.usage());
  out.codes = learner.codes();

  double e = 0.0;
  for (std::size_t k = 0; k < out.aligned.size(); ++k) {
    e += metric->norm2(code_residual(out.aligned[k].vector(), out.dictionary.atoms(), out.codes[k]));
  }
  out.report.final_rmse = std::sqrt(e / static_cast<double>(data.size()));
  out.report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

struct AlignFirstCodes {
  std::vector<PreShape> aligned;
  std::vector<RealSparseCode> codes;
};

/// Codes new data against an align-first dictionary: rotate along the
/// reference, then real ORMP in the stacked space.
inline AlignFirstCodes align_first_code(const std::vector<PreShape>& data, const Dictionary& dict,
                                        const PreShape& reference, Index n0, unsigned threads = 0) {
  if (n0 < 1 || n0 > dict.size()) throw UsageError("sparsity must lie in [1, J]");
  for (const PreShape& z : data) require_same_metric(z.metric(), dict.metric(), "align_first_code");
  require_same_metric(reference.metric(), dict.metric(), "align_first_code");
  const Metric& metric = *dict.metric();
  AlignFirstCodes out;
  out.aligned = align_dataset(data, reference).shapes;
  std::vector<CVector> atoms;
  for (Index j = 0; j < dict.size(); ++j) atoms.push_back(dict.atoms().col(j));
  const RMatrix d = detail::to_real_space(atoms, metric);
  const RMatrix x = detail::to_real_space(out.aligned, metric);
  RMatrix gram = d.transpose() * d;
  gram = (0.5 * (gram + gram.transpose())).eval();
  out.codes.resize(data.size());
  parallel_for(static_cast<Index>(data.size()), resolve_threads(threads), [&](Index k) {
    out.codes[static_cast<std::size_t>(k)] = ormp_real(RVector(x.col(k)), d, gram, n0);
  });
  return out;
}

}  // namespace ksd
