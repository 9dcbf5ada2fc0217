#pragma once

#include <random>
#include <vector>

#include "ksd/configspace.hpp"
#include "ksd/linalg.hpp"

namespace testing_util {

using namespace ksd;

inline CVector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector z(n);
  for (Index i = 0; i < n; ++i) z(i) = cplx(g(rng), g(rng));
  return z;
}

inline CMatrix random_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline cplx random_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {g(rng), g(rng)};
}

inline PreShape random_preshape(const MetricPtr& m, std::mt19937_64& rng) {
  return preshape(random_vector(m->dim(), rng), m);
}

inline std::vector<PreShape> random_preshapes(const MetricPtr& m, std::size_t k, std::mt19937_64& rng) {
  std::vector<PreShape> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(random_preshape(m, rng));
  return out;
}

// Random Hermitian positive-definite matrix with condition number about 10.
inline HermMatrix random_spd(Index n, std::mt19937_64& rng) {
  const CMatrix a = random_matrix(n, n, rng);
  CMatrix h = a * a.adjoint() / static_cast<double>(n) + CMatrix::Identity(n, n);
  return HermMatrix(0.5 * (h + h.adjoint()));
}

// Phi-orthonormal, centered family of k vectors (Gram-Schmidt in Phi).
inline CMatrix orthonormal_preshapes(const MetricPtr& m, Index k, std::mt19937_64& rng) {
  CMatrix q(m->dim(), k);
  for (Index j = 0; j < k; ++j) {
    CVector v = center(random_vector(m->dim(), rng), *m);
    for (Index i = 0; i < j; ++i) v -= m->inner(q.col(i), v) * q.col(i);
    for (Index i = 0; i < j; ++i) v -= m->inner(q.col(i), v) * q.col(i);
    q.col(j) = v / m->norm(v);
  }
  return q;
}

inline double rel_diff(const CMatrix& a, const CMatrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace testing_util
