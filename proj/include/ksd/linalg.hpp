#pragma once

// Dense complex linear algebra for a Hermitian metric Phi: products, metric
// square roots, Phi-self-adjoint eigendecomposition, pseudo-inverse.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "ksd/error.hpp"

namespace ksd {

using Index = Eigen::Index;
using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

/// Complex conjugate that stays real for real scalars.
template <typename Scalar>
Scalar conj(const Scalar& x) {
  if constexpr (is_complex<Scalar>::value) {
    return std::conj(x);
  } else {
    return x;
  }
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// Conjugate-symmetric matrix defining a Hermitian product z*Phi w.
///
/// Construction checks squareness, finiteness and conjugate symmetry to
/// 1e-14 (relative to the largest entry). Positive-definiteness is checked
/// lazily by metric_sqrt.
class HermMatrix {
 public:
  HermMatrix() = default;

  explicit HermMatrix(CMatrix entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols()) {
      throw UsageError("Hermitian matrix must be square, got " + std::to_string(m_.rows()) + "x" +
                       std::to_string(m_.cols()));
    }
    if (!all_finite(m_)) throw DataError("Hermitian matrix has non-finite entries");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    const double asym = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-14 * scale) {
      throw UsageError("matrix is not conjugate-symmetric (max asymmetry " + std::to_string(asym) + ")");
    }
    m_ = 0.5 * (m_ + m_.adjoint()).eval();
    identity_ = m_.isIdentity(0.0);
  }

  static HermMatrix identity(Index n) { return HermMatrix(CMatrix::Identity(n, n)); }

  const CMatrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  bool is_identity() const noexcept { return identity_; }

  cplx operator()(Index r, Index c) const { return m_(r, c); }

  friend bool operator==(const HermMatrix& a, const HermMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  CMatrix m_;
  bool identity_ = false;
};

namespace detail {

inline void check_dims(Index a, Index b, const char* what) {
  if (a != b) {
    throw UsageError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
  }
}

}  // namespace detail

/// Phi * w, skipping the product when Phi is the identity.
template <typename Derived>
CVector apply(const HermMatrix& phi, const Eigen::MatrixBase<Derived>& w) {
  detail::check_dims(phi.dim(), w.rows(), "apply");
  if (phi.is_identity()) return w;
  return phi.matrix() * w;
}

/// Hermitian product z*Phi w (antilinear in z).
inline cplx herm_inner(const CVector& z, const CVector& w, const HermMatrix& phi) {
  detail::check_dims(z.size(), w.size(), "herm_inner");
  detail::check_dims(z.size(), phi.dim(), "herm_inner");
  if (phi.is_identity()) return z.dot(w);
  return z.dot(phi.matrix() * w);
}

inline double herm_norm2(const CVector& z, const HermMatrix& phi) {
  return std::max(0.0, herm_inner(z, z, phi).real());
}

inline double herm_norm(const CVector& z, const HermMatrix& phi) { return std::sqrt(herm_norm2(z, phi)); }

/// D*Phi D for a matrix whose columns are configurations.
inline CMatrix herm_gram(const CMatrix& d, const HermMatrix& phi) {
  detail::check_dims(d.rows(), phi.dim(), "herm_gram");
  CMatrix g = phi.is_identity() ? CMatrix(d.adjoint() * d) : CMatrix(d.adjoint() * (phi.matrix() * d));
  return 0.5 * (g + g.adjoint());
}

/// Real 2N x 2N matrix [[A, -B], [B, A]] for a complex matrix A + iB.
inline RMatrix real_embedding(const CMatrix& m) {
  const Index r = m.rows();
  const Index c = m.cols();
  RMatrix out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = m.real();
  out.topRightCorner(r, c) = -m.imag();
  out.bottomLeftCorner(r, c) = m.imag();
  out.bottomRightCorner(r, c) = m.real();
  return out;
}

/// Stacks a complex vector x + iy as the real vector (x; y).
inline RVector stack_real(const CVector& z) {
  RVector out(2 * z.size());
  out.head(z.size()) = z.real();
  out.tail(z.size()) = z.imag();
  return out;
}

inline CVector unstack_real(const RVector& v) {
  if (v.size() % 2 != 0) throw UsageError("stacked real vector must have even length");
  const Index n = v.size() / 2;
  CVector out(n);
  for (Index i = 0; i < n; ++i) out(i) = cplx(v(i), v(n + i));
  return out;
}

/// Eigenvalues in descending order with Phi-orthonormal eigenvector columns.
struct EigenPairs {
  RVector values;
  CMatrix vectors;
};

namespace detail {

// Eigendecomposition of a conjugate-symmetric matrix through its real
// embedding. Every eigenvalue appears twice in the embedding, with the
// eigenvector pair (v; R v) where R is the rotation by pi/2. One complex
// vector per pair is extracted cluster by cluster with pivoted Gram-Schmidt.
inline EigenPairs hermitian_eig_standard(const CMatrix& h) {
  const Index n = h.rows();
  EigenPairs out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  if (n == 0) return out;

  Eigen::SelfAdjointEigenSolver<RMatrix> solver(real_embedding(h));
  if (solver.info() != Eigen::Success) throw NumericalError("real symmetric eigensolver failed");
  const RVector& lam = solver.eigenvalues();
  const RMatrix& vec = solver.eigenvectors();

  const double scale = std::max(lam.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double cluster_tol = 1e-9 * scale;

  Index accepted = 0;
  Index hi = 2 * n;
  while (hi > 0 && accepted < n) {
    Index lo = hi - 1;
    while (lo > 0 && lam(lo) - lam(lo - 1) <= cluster_tol) --lo;
    const Index size = hi - lo;
    const Index wanted = std::min<Index>((size + 1) / 2, n - accepted);

    CMatrix cand(n, size);
    for (Index c = 0; c < size; ++c) {
      const auto col = vec.col(lo + c);
      for (Index i = 0; i < n; ++i) cand(i, c) = cplx(col(i), col(n + i));
    }
    for (Index q = 0; q < accepted; ++q) {
      const auto qv = out.vectors.col(q);
      cand -= qv * (qv.adjoint() * cand);
    }
    std::vector<bool> used(static_cast<std::size_t>(size), false);
    for (Index pick = 0; pick < wanted; ++pick) {
      Index best = -1;
      double best_norm = 0.0;
      for (Index c = 0; c < size; ++c) {
        if (used[static_cast<std::size_t>(c)]) continue;
        const double nrm = cand.col(c).squaredNorm();
        if (nrm > best_norm) {
          best_norm = nrm;
          best = c;
        }
      }
      if (best < 0 || best_norm < 1e-6) break;
      used[static_cast<std::size_t>(best)] = true;
      CVector q = cand.col(best) / std::sqrt(best_norm);
      // second pass keeps orthogonality at machine precision
      q -= out.vectors.leftCols(accepted) * (out.vectors.leftCols(accepted).adjoint() * q);
      q.normalize();
      out.vectors.col(accepted) = q;
      out.values(accepted) = q.dot(h * q).real();
      ++accepted;
      cand -= q * (q.adjoint() * cand);
    }
    hi = lo;
  }
  if (accepted != n) {
    throw NumericalError("eigenvector extraction from real embedding failed (" + std::to_string(accepted) +
                         " of " + std::to_string(n) + ")");
  }
  // Rayleigh quotients inside a cluster may be out of order by rounding.
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return out.values(a) > out.values(b); });
  EigenPairs sorted;
  sorted.values.resize(n);
  sorted.vectors.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    sorted.values(i) = out.values(order[static_cast<std::size_t>(i)]);
    sorted.vectors.col(i) = out.vectors.col(order[static_cast<std::size_t>(i)]);
  }
  return sorted;
}

}  // namespace detail

/// Square root of a positive-definite metric and its inverse.
struct MetricSqrt {
  HermMatrix sqrt;
  HermMatrix inv_sqrt;
};

inline MetricSqrt metric_sqrt(const HermMatrix& phi) {
  const Index n = phi.dim();
  if (phi.is_identity()) return {HermMatrix::identity(n), HermMatrix::identity(n)};
  const EigenPairs eig = detail::hermitian_eig_standard(phi.matrix());
  const double lmax = eig.values.size() ? eig.values(0) : 0.0;
  const double lmin = eig.values.size() ? eig.values(n - 1) : 0.0;
  if (n > 0 && (lmin <= 0.0 || lmin <= 1e-12 * lmax)) {
    throw NumericalError("metric is not positive-definite (smallest eigenvalue " + std::to_string(lmin) + ")");
  }
  const RVector root = eig.values.cwiseSqrt();
  const CMatrix& v = eig.vectors;
  CMatrix s = v * root.cast<cplx>().asDiagonal() * v.adjoint();
  CMatrix si = v * root.cwiseInverse().cast<cplx>().asDiagonal() * v.adjoint();
  return {HermMatrix(0.5 * (s + s.adjoint())), HermMatrix(0.5 * (si + si.adjoint()))};
}

/// Eigendecomposition of an operator h self-adjoint with respect to Phi.
///
/// Solved as the standard problem sqrt(Phi) h sqrt(Phi)^-1 and mapped back,
/// so the returned vectors satisfy V*Phi V = Id and h = V diag(values) V*Phi.
inline EigenPairs herm_eig(const CMatrix& h, const HermMatrix& phi, const MetricSqrt& roots) {
  detail::check_dims(h.rows(), phi.dim(), "herm_eig");
  detail::check_dims(h.cols(), phi.dim(), "herm_eig");
  if (!all_finite(h)) throw DataError("herm_eig: non-finite operator");
  const CMatrix ph = phi.is_identity() ? h : CMatrix(phi.matrix() * h);
  const double scale = std::max(ph.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if ((ph - ph.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw UsageError("herm_eig: operator is not self-adjoint for the metric");
  }
  if (phi.is_identity()) return detail::hermitian_eig_standard(0.5 * (h + h.adjoint()));
  CMatrix std_op = roots.sqrt.matrix() * h * roots.inv_sqrt.matrix();
  std_op = 0.5 * (std_op + std_op.adjoint()).eval();
  EigenPairs eig = detail::hermitian_eig_standard(std_op);
  eig.vectors = roots.inv_sqrt.matrix() * eig.vectors;
  return eig;
}

inline EigenPairs herm_eig(const CMatrix& h, const HermMatrix& phi) {
  if (phi.is_identity()) return herm_eig(h, phi, MetricSqrt{phi, phi});
  return herm_eig(h, phi, metric_sqrt(phi));
}

/// Moore-Penrose pseudo-inverse from the eigendecomposition of the smaller
/// Gram matrix (AA* or A*A). Gram eigenvalues below
/// max(J, K) * eps * lambda_max count as zero.
template <typename Scalar>
Mat<Scalar> pinv(const Mat<Scalar>& a) {
  const Index rows = a.rows();
  const Index cols = a.cols();
  if (!all_finite(a)) throw DataError("pinv: non-finite input");
  Mat<Scalar> out = Mat<Scalar>::Zero(cols, rows);
  if (rows == 0 || cols == 0 || a.cwiseAbs().maxCoeff() == 0.0) return out;

  const bool wide = rows <= cols;
  const Mat<Scalar> gram = wide ? Mat<Scalar>(a * a.adjoint()) : Mat<Scalar>(a.adjoint() * a);
  RVector lam;
  Mat<Scalar> vec;
  if constexpr (is_complex<Scalar>::value) {
    EigenPairs eig = detail::hermitian_eig_standard(0.5 * (gram + gram.adjoint()));
    lam = std::move(eig.values);
    vec = std::move(eig.vectors);
  } else {
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(0.5 * (gram + gram.transpose()));
    if (solver.info() != Eigen::Success) throw NumericalError("pinv: eigensolver failed");
    lam = solver.eigenvalues();
    vec = solver.eigenvectors();
  }
  const double lmax = lam.maxCoeff();
  const double cutoff = static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * lmax;
  Mat<Scalar> inner = Mat<Scalar>::Zero(gram.rows(), gram.cols());
  for (Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > cutoff) inner += (vec.col(i) / lam(i)) * vec.col(i).adjoint();
  }
  out = wide ? Mat<Scalar>(a.adjoint() * inner) : Mat<Scalar>(inner * a.adjoint());
  return out;
}

/// Phi-orthogonal projection of w onto the complex line spanned by z.
inline CVector project_line(const CVector& z, const CVector& w, const HermMatrix& phi) {
  const double n2 = herm_norm2(z, phi);
  if (!(n2 > 0.0)) throw DataError("project_line: zero direction vector");
  return (herm_inner(z, w, phi) / n2) * z;
}

}  // namespace ksd
