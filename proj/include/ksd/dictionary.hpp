#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ksd/configspace.hpp"
#include "ksd/error.hpp"
#include "ksd/linalg.hpp"

namespace ksd {

/// J pre-shape atoms (columns) sharing one metric, with per-atom usage counts
/// from the most recent coding pass.
class Dictionary {
 public:
  Dictionary() = default;

  Dictionary(CMatrix atoms, MetricPtr metric, double tol = 1e-10)
      : atoms_(std::move(atoms)), metric_(std::move(metric)), usage_(static_cast<std::size_t>(atoms_.cols()), 0) {
    if (!metric_) throw UsageError("dictionary needs a metric");
    if (atoms_.cols() < 1) throw UsageError("dictionary needs at least one atom");
    detail::check_dims(atoms_.rows(), metric_->dim(), "dictionary atoms");
    for (Index j = 0; j < atoms_.cols(); ++j) {
      try {
        (void)PreShape::verified(atoms_.col(j), metric_, tol);
      } catch (const DataError& e) {
        throw DataError("atom " + std::to_string(j) + ": " + e.what());
      }
    }
  }

  static Dictionary from_preshapes(const std::vector<PreShape>& atoms) {
    if (atoms.empty()) throw UsageError("dictionary needs at least one atom");
    const MetricPtr& metric = atoms.front().metric();
    CMatrix d(metric->dim(), static_cast<Index>(atoms.size()));
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      require_same_metric(metric, atoms[j].metric(), "dictionary");
      d.col(static_cast<Index>(j)) = atoms[j].vector();
    }
    return Dictionary(std::move(d), metric);
  }

  const CMatrix& atoms() const noexcept { return atoms_; }
  const MetricPtr& metric() const noexcept { return metric_; }
  Index size() const noexcept { return atoms_.cols(); }
  Index dim() const noexcept { return atoms_.rows(); }

  PreShape atom(Index j) const { return PreShape::verified(atoms_.col(j), metric_, 1e-8); }

  /// D*Phi D.
  CMatrix gram() const { return herm_gram(atoms_, metric_->phi()); }

  const std::vector<std::size_t>& usage() const noexcept { return usage_; }
  void set_usage(std::vector<std::size_t> usage) {
    if (usage.size() != usage_.size()) throw UsageError("usage vector length must equal the number of atoms");
    usage_ = std::move(usage);
  }

 private:
  CMatrix atoms_;
  MetricPtr metric_;
  std::vector<std::size_t> usage_;
};

}  // namespace ksd
