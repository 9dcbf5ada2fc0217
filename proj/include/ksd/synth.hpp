#pragma once

// Synthetic planar shape datasets: base silhouettes, smooth random
// deformations and random similitudes.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ksd/configspace.hpp"
#include "ksd/error.hpp"
#include "ksd/linalg.hpp"
#include "ksd/parallel.hpp"

namespace ksd {

struct SynthSpec {
  /// Base kinds: "ellipse", "polygon-<k>", "star-<k>", or "imported-<i>"
  /// referring to `imported[i]`.
  std::vector<std::string> bases;
  std::vector<CVector> imported;
  Index landmarks = 32;
  Index copies = 1;
  double deformation = 0.0;  ///< eps: Phi-norm of each deformation
  double rotation_min = 0.0;
  double rotation_max = 0.0;
  double scale_min = 1.0;
  double scale_max = 1.0;
  double translation = 0.0;  ///< translations drawn per axis in [-t, t]
  std::uint64_t seed = 0;

  void validate() const {
    if (bases.empty()) throw UsageError("synthetic spec needs at least one base shape");
    if (landmarks < 3) throw UsageError("synthetic shapes need at least 3 landmarks");
    if (copies < 1) throw UsageError("copies per base must be at least 1");
    if (!(deformation >= 0.0)) throw UsageError("deformation scale must be nonnegative");
    if (rotation_max < rotation_min || scale_max < scale_min) throw UsageError("invalid similitude range");
    if (!(scale_min > 0.0)) throw UsageError("scales must be positive");
    if (!(translation >= 0.0)) throw UsageError("translation range must be nonnegative");
  }
};

namespace detail {

// n points at equal arc length along the closed polygon through `vertices`.
inline CVector resample_polygon(const std::vector<cplx>& vertices, Index n) {
  const std::size_t v = vertices.size();
  std::vector<double> cumulative(v + 1, 0.0);
  for (std::size_t i = 0; i < v; ++i) cumulative[i + 1] = cumulative[i] + std::abs(vertices[(i + 1) % v] - vertices[i]);
  const double perimeter = cumulative[v];
  CVector out(n);
  std::size_t edge = 0;
  for (Index i = 0; i < n; ++i) {
    const double s = perimeter * static_cast<double>(i) / static_cast<double>(n);
    while (edge + 1 < v && cumulative[edge + 1] <= s) ++edge;
    const double len = cumulative[edge + 1] - cumulative[edge];
    const double f = len > 0.0 ? (s - cumulative[edge]) / len : 0.0;
    out(i) = vertices[edge] + f * (vertices[(edge + 1) % v] - vertices[edge]);
  }
  return out;
}

inline Index parse_count(const std::string& kind, std::size_t prefix_len) {
  try {
    std::size_t used = 0;
    const int k = std::stoi(kind.substr(prefix_len), &used);
    if (used != kind.size() - prefix_len) throw std::invalid_argument(kind);
    return k;
  } catch (const std::exception&) {
    throw UsageError("malformed base shape kind '" + kind + "'");
  }
}

}  // namespace detail

/// Landmark configuration of a named silhouette.
///
/// "ellipse" has semi-axes 1 and 1/2 sampled at uniform angles; polygons
/// and stars (outer radius 1, inner 1/2) are sampled at uniform arc length
/// starting at a vertex.
inline CVector base_shape(const std::string& kind, Index n, const std::vector<CVector>& imported = {}) {
  if (n < 3) throw UsageError("base shapes need at least 3 landmarks");
  const double two_pi = 2.0 * std::numbers::pi;
  CVector z(n);
  if (kind == "ellipse") {
    for (Index i = 0; i < n; ++i) {
      const double t = two_pi * static_cast<double>(i) / static_cast<double>(n);
      z(i) = cplx(std::cos(t), 0.5 * std::sin(t));
    }
  } else if (kind.rfind("polygon-", 0) == 0) {
    const Index k = detail::parse_count(kind, 8);
    if (k < 3) throw UsageError("polygons need at least 3 vertices");
    std::vector<cplx> v;
    for (Index i = 0; i < k; ++i) v.push_back(std::polar(1.0, two_pi * static_cast<double>(i) / static_cast<double>(k)));
    z = detail::resample_polygon(v, n);
  } else if (kind.rfind("star-", 0) == 0) {
    const Index k = detail::parse_count(kind, 5);
    if (k < 2) throw UsageError("stars need at least 2 branches");
    std::vector<cplx> v;
    for (Index i = 0; i < 2 * k; ++i) {
      v.push_back(std::polar(i % 2 == 0 ? 1.0 : 0.5, two_pi * static_cast<double>(i) / static_cast<double>(2 * k)));
    }
    z = detail::resample_polygon(v, n);
  } else if (kind.rfind("imported-", 0) == 0) {
    const Index i = detail::parse_count(kind, 9);
    if (i < 0 || i >= static_cast<Index>(imported.size())) throw UsageError("no imported shape " + kind);
    z = imported[static_cast<std::size_t>(i)];
    detail::check_dims(z.size(), n, "imported shape");
  } else {
    throw UsageError("unknown base shape kind '" + kind + "'");
  }
  return z;
}

/// Squared-distance kernel K[i][j] = |z_i - z_j|^2 between landmarks.
inline RMatrix squared_distance_kernel(const CVector& z) {
  const Index n = z.size();
  RMatrix k(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) k(i, j) = std::norm(z(i) - z(j));
  }
  return k;
}

/// z_or + eps * d / |d|_Phi with d = K g, g a standard complex Gaussian
/// vector (independent N(0, 1/2) real and imaginary parts).
inline CVector deform(const PreShape& original, double eps, std::mt19937_64& rng) {
  if (!(eps >= 0.0)) throw UsageError("deformation scale must be nonnegative");
  const CVector& z = original.vector();
  if (eps == 0.0) return z;
  const RMatrix kernel = squared_distance_kernel(z);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  for (int attempt = 0; attempt < 10; ++attempt) {
    CVector g(z.size());
    for (Index i = 0; i < z.size(); ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      g(i) = cplx(re, im);
    }
    const CVector d = kernel.cast<cplx>() * g;
    const double nd = original.metric()->norm(d);
    if (nd > 0.0) return z + (eps / nd) * d;
  }
  throw NumericalError("deformation kept vanishing after 10 draws");
}

struct SynthDataset {
  MetricPtr metric;
  std::vector<PreShape> shapes;
  std::vector<std::string> labels;
};

/// For every base and copy: deform, apply a random similitude, project onto
/// the pre-shape sphere. Each (base, copy) pair has its own generator
/// stream, so the output does not depend on generation order.
inline SynthDataset make_dataset(const SynthSpec& spec) {
  spec.validate();
  SynthDataset out;
  out.metric = Metric::landmarks(spec.landmarks);
  const std::size_t total = spec.bases.size() * static_cast<std::size_t>(spec.copies);
  out.shapes.resize(total);
  out.labels.resize(total);
  for (std::size_t b = 0; b < spec.bases.size(); ++b) {
    const PreShape base = preshape(base_shape(spec.bases[b], spec.landmarks, spec.imported), out.metric);
    for (Index c = 0; c < spec.copies; ++c) {
      const std::size_t idx = b * static_cast<std::size_t>(spec.copies) + static_cast<std::size_t>(c);
      std::mt19937_64 rng = make_rng(spec.seed, static_cast<std::uint64_t>(idx));
      const CVector deformed = deform(base, spec.deformation, rng);
      std::uniform_real_distribution<double> rot(spec.rotation_min, spec.rotation_max);
      std::uniform_real_distribution<double> scl(spec.scale_min, spec.scale_max);
      std::uniform_real_distribution<double> shift(-spec.translation, spec.translation);
      const double angle = spec.rotation_max > spec.rotation_min ? rot(rng) : spec.rotation_min;
      const double scale = spec.scale_max > spec.scale_min ? scl(rng) : spec.scale_min;
      double tx = 0.0;
      double ty = 0.0;
      if (spec.translation > 0.0) {
        tx = shift(rng);
        ty = shift(rng);
      }
      const CVector moved = std::polar(scale, angle) * deformed + cplx(tx, ty) * out.metric->shift();
      out.shapes[idx] = preshape(moved, out.metric);
      out.labels[idx] = spec.bases[b];
    }
  }
  return out;
}

}  // namespace ksd
