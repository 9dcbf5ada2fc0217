#pragma once

// Kendall shape space: shapes are rotation orbits of pre-shapes. Distances,
// optimal alignment, geodesics and the full-Procrustes Frechet mean.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ksd/configspace.hpp"
#include "ksd/error.hpp"
#include "ksd/linalg.hpp"

namespace ksd {

/// Optimal similitude a(z, w) = z*Phi w bringing z onto w.
struct Alignment {
  cplx factor{0.0, 0.0};
  double angle = 0.0;    ///< arg(factor) in [0, 2 pi); 0 when decorrelated
  double scaling = 0.0;  ///< |factor|
  bool decorrelated = false;
};

namespace detail {

inline cplx correlation(const PreShape& z, const PreShape& w, const char* what) {
  require_same_metric(z.metric(), w.metric(), what);
  return z.metric()->inner(z.vector(), w.vector());
}

}  // namespace detail

/// Below this correlation modulus two pre-shapes count as decorrelated.
inline constexpr double kDecorrelatedTol = 1e-12;

inline Alignment optimal_alignment(const PreShape& z, const PreShape& w) {
  Alignment out;
  out.factor = detail::correlation(z, w, "optimal_alignment");
  out.scaling = std::abs(out.factor);
  if (out.scaling <= kDecorrelatedTol) {
    out.decorrelated = true;
    return out;
  }
  double theta = std::arg(out.factor);
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  if (theta >= 2.0 * std::numbers::pi) theta = 0.0;
  out.angle = theta;
  return out;
}

// The distances are evaluated as residual norms rather than through
// sqrt(1 - |a|^2) and arccos|a|, which lose half the digits for nearby shapes.

/// Full Procrustes distance |a z - w|_Phi = sqrt(1 - |a|^2), a = z* Phi w; in [0, 1].
inline double dist_full(const PreShape& z, const PreShape& w) {
  const cplx a = detail::correlation(z, w, "dist_full");
  return std::min(1.0, z.metric()->norm(CVector(a * z.vector() - w.vector())));
}

/// Partial Procrustes distance |e^{i arg a} z - w|_Phi = sqrt(2 - 2|a|); in [0, sqrt 2].
inline double dist_partial(const PreShape& z, const PreShape& w) {
  const cplx a = detail::correlation(z, w, "dist_partial");
  const double r = std::abs(a);
  const cplx phase = r > 0.0 ? a / r : cplx(1.0);
  return std::min(std::sqrt(2.0), z.metric()->norm(CVector(phase * z.vector() - w.vector())));
}

/// Geodesic distance arccos|a| = 2 asin(d_P / 2); in [0, pi/2].
inline double dist_geodesic(const PreShape& z, const PreShape& w) {
  return std::min(std::numbers::pi / 2, 2.0 * std::asin(std::min(1.0, 0.5 * dist_partial(z, w))));
}

struct GeodesicPoint {
  PreShape point;
  bool unique = true;  ///< false when the shapes are at maximal distance pi/2
};

/// Point at parameter t on the shortest geodesic from [z] to [w].
///
/// z is first rotated optimally along w; the arc then runs on the pre-shape
/// sphere from that representative to w.
inline GeodesicPoint geodesic_path(const PreShape& z, const PreShape& w, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw UsageError("geodesic parameter must lie in [0, 1]");
  const Alignment al = optimal_alignment(z, w);
  const PreShape start = al.decorrelated ? z : z.rotated(std::polar(1.0, al.angle));
  const Metric& m = *z.metric();
  const double c = std::min(1.0, m.inner(start.vector(), w.vector()).real());
  const double r = std::acos(c);
  GeodesicPoint out;
  out.unique = !al.decorrelated;
  if (r == 0.0) {
    out.point = w;
    return out;
  }
  const double s = std::sin(r);
  if (s < 1e-12) throw NumericalError("geodesic is not unique (antipodal representatives)");
  const CVector v = (std::sin((1.0 - t) * r) * start.vector() + std::sin(t * r) * w.vector()) / s;
  out.point = preshape(v, z.metric());
  return out;
}

struct FrechetMean {
  PreShape mean;
  RVector eigenvalues;  ///< spectrum of Z Z* Phi, descending
  bool unique = true;   ///< false when the top eigenvalue is (numerically) tied
};

/// Full-Procrustes Frechet mean: top eigenvector of Z Z* Phi.
inline FrechetMean frechet_mean(const std::vector<PreShape>& data) {
  if (data.empty()) throw UsageError("frechet_mean needs at least one pre-shape");
  const MetricPtr& metric = data.front().metric();
  const Index n = metric->dim();
  CMatrix zmat(n, static_cast<Index>(data.size()));
  for (std::size_t k = 0; k < data.size(); ++k) {
    require_same_metric(metric, data[k].metric(), "frechet_mean");
    zmat.col(static_cast<Index>(k)) = data[k].vector();
  }
  const CMatrix op = zmat * (zmat.adjoint() * metric->phi().matrix());
  const EigenPairs eig = herm_eig(op, metric->phi(), metric->roots());
  FrechetMean out;
  out.eigenvalues = eig.values;
  out.mean = preshape(eig.vectors.col(0), metric);
  if (n > 1) {
    const double l1 = eig.values(0);
    out.unique = (l1 - eig.values(1)) > 1e-10 * l1;
  }
  return out;
}

}  // namespace ksd
