#pragma once

// Closed (periodic) cubic B-spline curves: generator, periodized basis,
// Gram matrix of the basis and curve sampling.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "ksd/error.hpp"
#include "ksd/linalg.hpp"

namespace ksd {

/// Cubic B-spline generator, supported on [-2, 2].
inline double beta3(double t) {
  const double a = std::abs(t);
  if (a <= 1.0) return a * a * a / 2.0 - a * a + 2.0 / 3.0;
  if (a <= 2.0) {
    const double b = 2.0 - a;
    return b * b * b / 6.0;
  }
  return 0.0;
}

/// Periodized basis function phi_n on [0, 1] for M control points.
///
/// Sums the generator over all periodic images; for M >= 4 and t in [0, 1]
/// only the images shifted by -M, 0 and +M can be nonzero, which gives the
/// wrapped copies for n in {0, 1, M-1} and a single copy otherwise.
inline double basis_closed(Index m, Index n, double t) {
  if (m < 4) throw UsageError("closed cubic B-splines need at least 4 control points");
  if (n < 0 || n >= m) {
    throw UsageError("basis index " + std::to_string(n) + " out of range [0, " + std::to_string(m) + ")");
  }
  const double x = static_cast<double>(m) * t - static_cast<double>(n);
  const double md = static_cast<double>(m);
  return beta3(x + md) + beta3(x) + beta3(x - md);
}

namespace detail {

// c_k = integral of beta3(x) beta3(x - k), k = 0..3. The integrand is a
// degree-6 polynomial between integer knots, so a 4-point Gauss-Legendre
// rule per unit interval is exact.
inline std::array<double, 4> beta3_autocorrelation() {
  const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
  const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
  const std::array<double, 4> nodes = {-b, -a, a, b};
  const std::array<double, 4> weights = {wb, wa, wa, wb};
  std::array<double, 4> c{};
  for (int k = 0; k < 4; ++k) {
    double sum = 0.0;
    for (int cell = -2; cell < 2; ++cell) {
      for (std::size_t q = 0; q < 4; ++q) {
        const double x = cell + 0.5 + 0.5 * nodes[q];
        sum += 0.5 * weights[q] * beta3(x) * beta3(x - k);
      }
    }
    c[static_cast<std::size_t>(k)] = sum;
  }
  return c;
}

}  // namespace detail

/// Closed cubic B-spline space with M control points.
struct SplineBasis {
  Index m = 0;
  HermMatrix gram;
  CVector shift;
};

/// Gram matrix G[n][m] = integral over [0, 1] of phi_n phi_m.
///
/// Entry (n, m) is (1/M) times the sum of c_|lag| over every periodic image
/// of the circular lag n - m, so small M picks up both wrap contributions.
inline SplineBasis gram_closed(Index m) {
  if (m < 4) throw UsageError("closed cubic B-splines need at least 4 control points, got " + std::to_string(m));
  const auto c = detail::beta3_autocorrelation();
  std::vector<double> by_lag(static_cast<std::size_t>(m), 0.0);
  for (Index lag = 0; lag < m; ++lag) {
    double v = 0.0;
    for (Index image = -2; image <= 2; ++image) {
      const Index k = std::abs(lag + image * m);
      if (k < 4) v += c[static_cast<std::size_t>(k)];
    }
    by_lag[static_cast<std::size_t>(lag)] = v / static_cast<double>(m);
  }
  CMatrix g(m, m);
  for (Index r = 0; r < m; ++r) {
    for (Index col = 0; col < m; ++col) {
      g(r, col) = by_lag[static_cast<std::size_t>(((r - col) % m + m) % m)];
    }
  }
  return SplineBasis{m, HermMatrix(std::move(g)), CVector::Ones(m)};
}

/// Evaluates the curve sum_n z[n] phi_n(t) at t_i = i / num_samples.
inline std::vector<cplx> sample_curve(const CVector& z, const SplineBasis& basis, Index num_samples) {
  if (num_samples < 2) throw UsageError("sample_curve needs at least 2 samples");
  detail::check_dims(z.size(), basis.m, "sample_curve");
  const Index m = basis.m;
  std::vector<cplx> out(static_cast<std::size_t>(num_samples));
  for (Index i = 0; i < num_samples; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(num_samples);
    // only the four control points around m*t contribute
    const auto base = static_cast<Index>(std::floor(static_cast<double>(m) * t));
    cplx v = 0.0;
    for (Index off = -1; off <= 2; ++off) {
      const Index n = ((base + off) % m + m) % m;
      v += z(n) * basis_closed(m, n, t);
    }
    out[static_cast<std::size_t>(i)] = v;
  }
  return out;
}

}  // namespace ksd
