#pragma once

// Shape dictionary learning: alternate Cholesky-ORMP sparse coding with a
// MOD dictionary update D = Z A^+, then project the atoms back onto the
// pre-shape sphere and replace dead ones by random data.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ksd/configspace.hpp"
#include "ksd/dictionary.hpp"
#include "ksd/error.hpp"
#include "ksd/linalg.hpp"
#include "ksd/ormp.hpp"
#include "ksd/parallel.hpp"

namespace ksd {

struct LearnConfig {
  Index atoms = 10;       ///< J
  Index sparsity = 3;     ///< N0
  Index iterations = 30;  ///< T
  std::uint64_t seed = 0;
  Index batch_size = 0;  ///< 0 = full batch
  std::size_t dead_atom_usage_threshold = 0;
  unsigned threads = 0;  ///< 0 = KSD_THREADS or hardware
  /// Keep a sample's previous support when it still beats the fresh ORMP
  /// code. Makes every coding pass monotone, but the learned atoms then fit
  /// supports that plain ORMP may not find again when coding new data.
  bool warm_start = false;
  /// Return the dictionary with the lowest full-pass loss seen, not just the
  /// last one. Greedy coding can raise the loss between iterations. Only
  /// used with full-batch, plain ORMP passes, where re-coding the kept
  /// dictionary reproduces its loss exactly.
  bool keep_best = true;

  void validate() const {
    if (atoms < 1) throw UsageError("number of atoms must be at least 1");
    if (sparsity < 1) throw UsageError("sparsity must be at least 1");
    if (sparsity > atoms) throw UsageError("sparsity cannot exceed the number of atoms");
    if (iterations < 1) throw UsageError("number of iterations must be at least 1");
    if (batch_size < 0) throw UsageError("batch size must be nonnegative");
  }
};

struct LearnReport {
  std::vector<double> loss_history;  ///< E after every coding pass, final pass last
  double final_rmse = 0.0;
  std::size_t atom_replacements = 0;
  double wall_time_seconds = 0.0;
  std::vector<std::string> warnings;
};

struct LearnResult {
  Dictionary dictionary;
  std::vector<SparseCode> codes;
  LearnReport report;
};

/// MOD update: the least-squares dictionary Z A^+ for fixed codes. It does
/// not depend on the metric.
template <typename Scalar>
Mat<Scalar> mod_update(const Mat<Scalar>& z, const Mat<Scalar>& a) {
  if (a.cols() != z.cols()) {
    throw UsageError("mod_update: codes have " + std::to_string(a.cols()) + " columns but data has " +
                     std::to_string(z.cols()));
  }
  return z * pinv(a);
}

inline CMatrix mod_update(const CMatrix& z, const CMatrix& a) { return mod_update<cplx>(z, a); }

/// Alternating minimization state, generic over the weight field.
///
/// Works in coordinates where the product is y* Phi x (Phi may be absent,
/// meaning the Euclidean product). Data columns are expected to be
/// pre-shapes in those coordinates.
template <typename Scalar>
class ModLearner {
 public:
  ModLearner(Mat<Scalar> data, std::optional<Mat<Scalar>> phi, LearnConfig cfg)
      : x_(std::move(data)), phi_(std::move(phi)), cfg_(cfg), codes_(static_cast<std::size_t>(x_.cols())) {
    cfg_.validate();
    if (x_.cols() < 1) throw DataError("learning needs a nonempty dataset");
    if (phi_ && (phi_->rows() != x_.rows() || phi_->cols() != x_.rows())) {
      throw UsageError("metric size does not match the data dimension");
    }
    threads_ = resolve_threads(cfg_.threads);
    replace_rng_ = make_rng(cfg_.seed, 1);
    batch_rng_ = make_rng(cfg_.seed, 2);
  }

  /// J columns drawn from the data by the seeded generator, distinct while
  /// J <= K.
  void init_from_data() {
    auto rng = make_rng(cfg_.seed, 0);
    const Index k = x_.cols();
    std::vector<Index> idx = sample_without_replacement(k, cfg_.atoms, rng);
    std::uniform_int_distribution<Index> any(0, k - 1);
    while (static_cast<Index>(idx.size()) < cfg_.atoms) idx.push_back(any(rng));
    d_.resize(x_.rows(), cfg_.atoms);
    for (Index j = 0; j < cfg_.atoms; ++j) d_.col(j) = x_.col(idx[static_cast<std::size_t>(j)]);
  }

  void set_dictionary(Mat<Scalar> d) {
    if (d.rows() != x_.rows() || d.cols() != cfg_.atoms) throw UsageError("initial dictionary has the wrong shape");
    d_ = std::move(d);
  }

  const Mat<Scalar>& dictionary() const noexcept { return d_; }
  const Mat<Scalar>& data() const noexcept { return x_; }
  const std::vector<SparseCodeT<Scalar>>& codes() const noexcept { return codes_; }
  std::size_t replacements() const noexcept { return replacements_; }

  /// Codes the samples in `which` with the current dictionary. With `warm`,
  /// a sample keeps its previous support (re-solved on the current atoms)
  /// whenever that beats the fresh ORMP code.
  void code_pass(const std::vector<Index>& which, bool warm) {
    const Mat<Scalar> phi_d = apply_phi(d_);
    Mat<Scalar> gram = d_.adjoint() * phi_d;
    gram = (0.5 * (gram + gram.adjoint())).eval();
    parallel_for(static_cast<Index>(which.size()), threads_, [&](Index i) {
      const Index k = which[static_cast<std::size_t>(i)];
      const Vec<Scalar> corr = phi_d.adjoint() * x_.col(k);
      SparseCodeT<Scalar> fresh = detail::ormp_gram<Scalar>(gram, corr, norm(x_.col(k)), cfg_.sparsity);
      fresh.residual_norm = residual_norm(k, fresh);
      SparseCodeT<Scalar>& slot = codes_[static_cast<std::size_t>(k)];
      if (warm && !slot.empty()) {
        if (auto old = resolve_support(gram, corr, slot.support)) {
          old->residual_norm = residual_norm(k, *old);
          if (old->residual_norm < fresh.residual_norm) {
            slot = std::move(*old);
            return;
          }
        }
      }
      slot = std::move(fresh);
    });
  }

  void code_all(bool warm) {
    std::vector<Index> all(static_cast<std::size_t>(x_.cols()));
    for (Index k = 0; k < x_.cols(); ++k) all[static_cast<std::size_t>(k)] = k;
    code_pass(all, warm);
  }

  /// A with one column per sample.
  Mat<Scalar> code_matrix() const {
    Mat<Scalar> a = Mat<Scalar>::Zero(cfg_.atoms, x_.cols());
    for (Index k = 0; k < x_.cols(); ++k) a.col(k) = codes_[static_cast<std::size_t>(k)].dense(cfg_.atoms);
    return a;
  }

  std::vector<std::size_t> usage() const {
    std::vector<std::size_t> u(static_cast<std::size_t>(cfg_.atoms), 0);
    for (const auto& c : codes_) {
      for (Index j : c.support) ++u[static_cast<std::size_t>(j)];
    }
    return u;
  }

  /// E(D, A) recomputed from the residual vectors.
  double energy() const { return energy(d_); }

  double energy(const Mat<Scalar>& d) const {
    double e = 0.0;
    for (Index k = 0; k < x_.cols(); ++k) {
      const auto& c = codes_[static_cast<std::size_t>(k)];
      Vec<Scalar> r = x_.col(k);
      for (std::size_t i = 0; i < c.support.size(); ++i) r -= c.coefficients[i] * d.col(c.support[i]);
      e += norm2(r);
    }
    return e;
  }

  Mat<Scalar> mod_step() const { return mod_update<Scalar>(x_, code_matrix()); }

  /// Normalizes the nonzero columns of `raw`; zero columns, and columns used
  /// at most dead_atom_usage_threshold times when `usage` is given, are
  /// replaced by distinct data columns.
  void renormalize_and_replace(Mat<Scalar> raw, const std::vector<std::size_t>* usage) {
    std::vector<Index> dead;
    for (Index j = 0; j < raw.cols(); ++j) {
      const double n = norm(raw.col(j));
      const bool unused = usage && (*usage)[static_cast<std::size_t>(j)] <= cfg_.dead_atom_usage_threshold;
      if (!(n > 1e-10) || unused) {
        dead.push_back(j);
      } else {
        raw.col(j) /= n;
      }
    }
    if (static_cast<Index>(dead.size()) > x_.cols()) {
      throw DataError("dataset too small to replace " + std::to_string(dead.size()) + " dead atoms");
    }
    const std::vector<Index> picks = sample_without_replacement(x_.cols(), static_cast<Index>(dead.size()), replace_rng_);
    for (std::size_t i = 0; i < dead.size(); ++i) raw.col(dead[i]) = x_.col(picks[i]);
    replacements_ += dead.size();
    d_ = std::move(raw);
  }

  /// One outer iteration; returns E after its coding pass.
  double iterate() {
    if (cfg_.batch_size <= 0 || cfg_.batch_size >= x_.cols()) {
      code_all(cfg_.warm_start);
      const double e = energy();
      const std::vector<std::size_t> u = usage();
      renormalize_and_replace(mod_step(), &u);
      return e;
    }
    // Stochastic epoch: only a random batch of codes is refreshed, the others
    // keep their last value (zero until first coded); then a full MOD update.
    const std::vector<Index> batch = sample_without_replacement(x_.cols(), cfg_.batch_size, batch_rng_);
    code_pass(batch, cfg_.warm_start);
    const double e = energy();
    const std::vector<std::size_t> u = usage();
    renormalize_and_replace(mod_step(), &u);
    return e;
  }

  double norm2(const Vec<Scalar>& v) const {
    if (!phi_) return v.squaredNorm();
    return std::max(0.0, std::real(v.dot(*phi_ * v)));
  }
  double norm(const Vec<Scalar>& v) const { return std::sqrt(norm2(v)); }

 private:
  Mat<Scalar> apply_phi(const Mat<Scalar>& m) const { return phi_ ? Mat<Scalar>(*phi_ * m) : m; }

  double residual_norm(Index k, const SparseCodeT<Scalar>& c) const {
    Vec<Scalar> r = x_.col(k);
    for (std::size_t i = 0; i < c.support.size(); ++i) r -= c.coefficients[i] * d_.col(c.support[i]);
    return norm(r);
  }

  static std::optional<SparseCodeT<Scalar>> resolve_support(const Mat<Scalar>& gram, const Vec<Scalar>& corr,
                                                          const std::vector<Index>& support) {
    const Index len = static_cast<Index>(support.size());
    Mat<Scalar> g(len, len);
    Vec<Scalar> b(len);
    for (Index i = 0; i < len; ++i) {
      b(i) = corr(support[static_cast<std::size_t>(i)]);
      for (Index j = 0; j < len; ++j) g(i, j) = gram(support[static_cast<std::size_t>(i)], support[static_cast<std::size_t>(j)]);
    }
    Eigen::LLT<Mat<Scalar>> llt(g);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const RVector diag = llt.matrixL().toDenseMatrix().diagonal().real();
    if (diag.minCoeff() <= 1e-6 * diag.maxCoeff()) return std::nullopt;
    const Vec<Scalar> alpha = llt.solve(b);
    SparseCodeT<Scalar> out;
    out.support = support;
    out.coefficients.assign(alpha.data(), alpha.data() + len);
    return out;
  }

  Mat<Scalar> x_;
  std::optional<Mat<Scalar>> phi_;
  LearnConfig cfg_;
  Mat<Scalar> d_;
  std::vector<SparseCodeT<Scalar>> codes_;
  std::mt19937_64 replace_rng_;
  std::mt19937_64 batch_rng_;
  std::size_t replacements_ = 0;
  unsigned threads_ = 1;
};

namespace detail {

// T iterations plus the final coding pass; fills loss_history and the
// replacement count.
template <typename Scalar>
void run_iterations(ModLearner<Scalar>& learner, const LearnConfig& cfg, LearnReport& report) {
  const Index k = learner.data().cols();
  const bool track = cfg.keep_best && !cfg.warm_start && (cfg.batch_size <= 0 || cfg.batch_size >= k);
  double best = std::numeric_limits<double>::infinity();
  Mat<Scalar> best_d;
  for (Index t = 0; t < cfg.iterations; ++t) {
    Mat<Scalar> before = learner.dictionary();
    const double e = learner.iterate();
    report.loss_history.push_back(e);
    if (track && e < best) {
      best = e;
      best_d = std::move(before);
    }
  }
  learner.code_all(cfg.warm_start);
  double e = learner.energy();
  if (track && best < e) {
    learner.set_dictionary(std::move(best_d));
    learner.code_all(false);
    e = learner.energy();
  }
  report.loss_history.push_back(e);
  report.atom_replacements = learner.replacements();
}

}  // namespace detail

struct LossRmse {
  double energy = 0.0;
  double rmse = 0.0;
};

/// E = sum_k |z_k - D alpha_k|^2 and RMSE = sqrt(E / K).
inline LossRmse loss_and_rmse(const std::vector<PreShape>& data, const Dictionary& dict,
                              const std::vector<SparseCode>& codes) {
  if (data.empty()) throw UsageError("loss_and_rmse: empty dataset");
  if (codes.size() != data.size()) throw UsageError("loss_and_rmse: number of codes differs from number of data");
  const Metric& m = *dict.metric();
  LossRmse out;
  for (std::size_t k = 0; k < data.size(); ++k) {
    require_same_metric(data[k].metric(), dict.metric(), "loss_and_rmse");
    out.energy += m.norm2(code_residual(data[k].vector(), dict.atoms(), codes[k]));
  }
  out.rmse = std::sqrt(out.energy / static_cast<double>(data.size()));
  return out;
}

struct Reconstruction {
  CVector raw;
  std::optional<PreShape> preshape;  ///< empty when D alpha collapses to zero
};

/// D alpha and its projection onto the pre-shape sphere.
template <typename Scalar>
Reconstruction reconstruct(const Dictionary& dict, const SparseCodeT<Scalar>& code) {
  Reconstruction out;
  out.raw = CVector::Zero(dict.dim());
  for (std::size_t i = 0; i < code.support.size(); ++i) {
    const Index j = code.support[i];
    if (j < 0 || j >= dict.size()) throw UsageError("reconstruct: atom index out of range");
    out.raw += cplx(code.coefficients[i]) * dict.atoms().col(j);
  }
  const double n = dict.metric()->norm(out.raw);
  if (n > 1e-12) out.preshape = PreShape::verified(out.raw / n, dict.metric(), 1e-8);
  return out;
}

namespace detail {

inline CMatrix stack_columns(const std::vector<PreShape>& data) {
  const MetricPtr& metric = data.front().metric();
  CMatrix z(metric->dim(), static_cast<Index>(data.size()));
  for (std::size_t k = 0; k < data.size(); ++k) {
    require_same_metric(metric, data[k].metric(), "dataset");
    z.col(static_cast<Index>(k)) = data[k].vector();
  }
  return z;
}

}  // namespace detail

/// Dictionary renormalization and replacement on Phi-space columns; data are
/// drawn without replacement by `rng`.
inline Dictionary renormalize_and_replace(CMatrix raw, const std::vector<PreShape>& data,
                                          const std::vector<std::size_t>& usage, std::size_t usage_threshold,
                                          std::mt19937_64& rng, std::size_t* replaced = nullptr) {
  if (data.empty()) throw UsageError("renormalize_and_replace: empty dataset");
  if (usage.size() != static_cast<std::size_t>(raw.cols())) throw UsageError("usage vector length mismatch");
  const MetricPtr& metric = data.front().metric();
  std::vector<Index> dead;
  for (Index j = 0; j < raw.cols(); ++j) {
    const double n = metric->norm(raw.col(j));
    if (!(n > 1e-10) || usage[static_cast<std::size_t>(j)] <= usage_threshold) {
      dead.push_back(j);
    } else {
      raw.col(j) /= n;
    }
  }
  if (dead.size() > data.size()) {
    throw DataError("dataset too small to replace " + std::to_string(dead.size()) + " dead atoms");
  }
  const std::vector<Index> picks = sample_without_replacement(static_cast<Index>(data.size()),
                                                              static_cast<Index>(dead.size()), rng);
  for (std::size_t i = 0; i < dead.size(); ++i) {
    raw.col(dead[i]) = data[static_cast<std::size_t>(picks[i])].vector();
  }
  if (replaced) *replaced = dead.size();
  Dictionary out(std::move(raw), metric);
  out.set_usage(usage);
  return out;
}

/// Learns a shape dictionary. Without `init`, the atoms start as J data
/// pre-shapes picked by the seeded generator. After T iterations a final
/// full coding pass produces the returned codes.
inline LearnResult learn(const std::vector<PreShape>& data, const LearnConfig& cfg,
                         const std::optional<Dictionary>& init = std::nullopt) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  if (data.empty()) throw DataError("learning needs a nonempty dataset");
  const MetricPtr& metric = data.front().metric();
  LearnReport report;
  if (static_cast<Index>(data.size()) < cfg.atoms) {
    report.warnings.push_back("fewer data (" + std::to_string(data.size()) + ") than atoms (" +
                              std::to_string(cfg.atoms) + ")");
  }
  std::optional<CMatrix> phi;
  if (!metric->phi().is_identity()) phi = metric->phi().matrix();
  ModLearner<cplx> learner(detail::stack_columns(data), phi, cfg);
  if (init) {
    require_same_metric(metric, init->metric(), "learn");
    learner.set_dictionary(init->atoms());
  } else {
    learner.init_from_data();
  }
  detail::run_iterations(learner, cfg, report);

  LearnResult out{Dictionary(learner.dictionary(), metric), learner.codes(), {}};
  out.dictionary.set_usage(learner.usage());
  report.final_rmse = loss_and_rmse(data, out.dictionary, out.codes).rmse;
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.report = std::move(report);
  return out;
}

}  // namespace ksd
