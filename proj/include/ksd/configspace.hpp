#pragma once

// Configuration spaces (C^N with a Hermitian metric and a shift direction),
// centering and projection onto the pre-shape sphere.

#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "ksd/bspline.hpp"
#include "ksd/error.hpp"
#include "ksd/linalg.hpp"

namespace ksd {

enum class MetricKind { landmarks, bspline_closed, custom };

inline std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::landmarks: return "landmarks";
    case MetricKind::bspline_closed: return "bspline_closed";
    case MetricKind::custom: return "custom";
  }
  return "unknown";
}

inline MetricKind metric_kind_from_string(std::string_view s) {
  if (s == "landmarks") return MetricKind::landmarks;
  if (s == "bspline_closed") return MetricKind::bspline_closed;
  if (s == "custom") return MetricKind::custom;
  throw DataError("unknown metric kind '" + std::string(s) + "'");
}

class Metric;
using MetricPtr = std::shared_ptr<const Metric>;

/// The pair (Phi, u): Hermitian product and shift configuration.
///
/// Immutable after construction; the square root of Phi is computed once.
class Metric {
 public:
  static MetricPtr landmarks(Index n) {
    if (n < 1) throw UsageError("landmark configurations need N >= 1");
    return MetricPtr(new Metric(MetricKind::landmarks, HermMatrix::identity(n), CVector::Ones(n)));
  }

  static MetricPtr bspline_closed(Index m) {
    SplineBasis basis = gram_closed(m);
    return MetricPtr(new Metric(MetricKind::bspline_closed, std::move(basis.gram), std::move(basis.shift)));
  }

  static MetricPtr custom(HermMatrix phi, CVector shift) {
    return MetricPtr(new Metric(MetricKind::custom, std::move(phi), std::move(shift)));
  }

  MetricKind kind() const noexcept { return kind_; }
  Index dim() const noexcept { return phi_.dim(); }
  const HermMatrix& phi() const noexcept { return phi_; }
  const CVector& shift() const noexcept { return shift_; }
  double shift_norm2() const noexcept { return shift_norm2_; }
  const MetricSqrt& roots() const noexcept { return roots_; }

  cplx inner(const CVector& z, const CVector& w) const { return herm_inner(z, w, phi_); }
  double norm2(const CVector& z) const { return herm_norm2(z, phi_); }
  double norm(const CVector& z) const { return herm_norm(z, phi_); }

  /// Spline basis for bspline_closed metrics (used for curve sampling).
  SplineBasis spline_basis() const {
    if (kind_ != MetricKind::bspline_closed) throw UsageError("metric is not a closed B-spline metric");
    return SplineBasis{dim(), phi_, shift_};
  }

  friend bool same_geometry(const Metric& a, const Metric& b) {
    return &a == &b || (a.kind_ == b.kind_ && a.phi_ == b.phi_ && a.shift_ == b.shift_);
  }

 private:
  Metric(MetricKind kind, HermMatrix phi, CVector shift)
      : kind_(kind), phi_(std::move(phi)), shift_(std::move(shift)) {
    detail::check_dims(shift_.size(), phi_.dim(), "metric shift");
    if (!all_finite(shift_)) throw DataError("shift configuration has non-finite entries");
    roots_ = metric_sqrt(phi_);
    shift_norm2_ = herm_norm2(shift_, phi_);
    if (!(shift_norm2_ > 0.0)) throw DataError("shift configuration must have nonzero norm");
  }

  MetricKind kind_;
  HermMatrix phi_;
  CVector shift_;
  double shift_norm2_ = 0.0;
  MetricSqrt roots_;
};

inline void require_same_metric(const MetricPtr& a, const MetricPtr& b, const char* what) {
  if (!a || !b || !same_geometry(*a, *b)) {
    throw UsageError(std::string(what) + ": arguments live in different configuration spaces");
  }
}

/// Center b = u*Phi z / |u|^2 of a configuration.
inline cplx centre_of(const CVector& z, const Metric& m) {
  detail::check_dims(z.size(), m.dim(), "centre_of");
  return m.inner(m.shift(), z) / m.shift_norm2();
}

/// Orthogonal projection onto the hyperplane of centered configurations.
inline CVector center(const CVector& z, const Metric& m) { return z - centre_of(z, m) * m.shift(); }

inline bool is_degenerate(const CVector& z, const Metric& m) {
  return m.norm(center(z, m)) <= 1e-12 * std::max(m.norm(z), 1.0);
}

/// Centered, unit-norm configuration tied to its metric.
class PreShape {
 public:
  PreShape() = default;

  /// Wraps a vector that is already a pre-shape; throws DataError otherwise.
  static PreShape verified(CVector z, MetricPtr metric, double tol = 1e-10) {
    if (!metric) throw UsageError("pre-shape needs a metric");
    detail::check_dims(z.size(), metric->dim(), "pre-shape");
    if (!all_finite(z)) throw DataError("pre-shape has non-finite entries");
    const double off_centre = std::abs(metric->inner(metric->shift(), z));
    const double norm = metric->norm(z);
    if (off_centre > tol || std::abs(norm - 1.0) > tol) {
      throw DataError("vector is not a pre-shape (|u*Phi z| = " + std::to_string(off_centre) +
                      ", |z| = " + std::to_string(norm) + ")");
    }
    return PreShape(std::move(z), std::move(metric));
  }

  const CVector& vector() const noexcept { return z_; }
  const MetricPtr& metric() const noexcept { return metric_; }
  Index size() const noexcept { return z_.size(); }

  /// e^{i theta} z, again a pre-shape.
  PreShape rotated(double theta) const { return PreShape(std::polar(1.0, theta) * z_, metric_); }
  PreShape rotated(cplx unit_phase) const { return PreShape(unit_phase * z_, metric_); }

 private:
  friend PreShape preshape(const CVector& z, const MetricPtr& metric);

  PreShape(CVector z, MetricPtr metric) : z_(std::move(z)), metric_(std::move(metric)) {}

  CVector z_;
  MetricPtr metric_;
};

/// Projection onto the pre-shape sphere: center, then normalize.
inline PreShape preshape(const CVector& z, const MetricPtr& metric) {
  if (!metric) throw UsageError("preshape needs a metric");
  detail::check_dims(z.size(), metric->dim(), "preshape");
  if (!all_finite(z)) throw DataError("configuration has non-finite entries");
  const CVector z0 = center(z, *metric);
  const double n0 = metric->norm(z0);
  if (!(n0 > 1e-12 * metric->norm(z))) throw DataError("degenerate configuration (lies on the translation line)");
  CVector p = z0 / n0;
  // one refinement pass pushes the centering residual to rounding level
  p = center(p, *metric);
  p /= metric->norm(p);
  return PreShape(std::move(p), metric);
}

inline PreShape preshape(const PreShape& p) { return preshape(p.vector(), p.metric()); }

}  // namespace ksd
