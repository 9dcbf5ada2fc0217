#pragma once

// Order Recursive Matching Pursuit in a Hermitian (or real Euclidean) space.
//
// Two complex coders are provided: the direct one, which keeps the
// orthogonalized atoms as vectors, and the Cholesky-optimized one, which only
// touches the precomputed Gram matrix D*Phi D and the correlations D*Phi z.
// The Gram-based kernel is a template so the same code also serves the real
// coder used by the align-first baseline.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ksd/configspace.hpp"
#include "ksd/dictionary.hpp"
#include "ksd/error.hpp"
#include "ksd/linalg.hpp"

namespace ksd {

/// Sparse weight vector: support indices in selection order and the matching
/// coefficients.
template <typename Scalar>
struct SparseCodeT {
  std::vector<Index> support;
  std::vector<Scalar> coefficients;
  double residual_norm = 0.0;

  bool empty() const noexcept { return support.empty(); }

  Vec<Scalar> dense(Index num_atoms) const {
    Vec<Scalar> a = Vec<Scalar>::Zero(num_atoms);
    for (std::size_t i = 0; i < support.size(); ++i) a(support[i]) = coefficients[i];
    return a;
  }
};

using SparseCode = SparseCodeT<cplx>;
using RealSparseCode = SparseCodeT<double>;

/// The coder stops when the best normalized correlation is at most
/// kStopRelTol * |z|.
inline constexpr double kStopRelTol = 1e-12;
/// An atom is numerically dependent on the selected ones when its
/// orthogonalized squared norm drops below this fraction of its squared norm.
inline constexpr double kDependentAtomRelTol = 1e-12;

/// Internal state of the Cholesky coder after the last step.
template <typename Scalar>
struct CholeskyState {
  Mat<Scalar> u;                        ///< upper triangular, inverse conjugate of the Cholesky factor
  std::vector<Scalar> normalized_corr;  ///< q_l* Phi r^(l-1) for each step
  std::vector<double> residual_norms;   ///< |r^(l)| after each step (by downdating)
};

/// Per-step record of the direct coder.
struct NaiveTrace {
  std::vector<CVector> residuals;  ///< r^(l), l = 1..L
  std::vector<CVector> basis;      ///< q^(l), l = 1..L
};

namespace detail {

template <typename Scalar>
SparseCodeT<Scalar> ormp_gram(const Mat<Scalar>& gram, const Vec<Scalar>& corr, double z_norm, Index n0,
                              CholeskyState<Scalar>* state = nullptr) {
  const Index num_atoms = gram.rows();
  if (gram.cols() != num_atoms || corr.size() != num_atoms) throw UsageError("ormp: Gram/correlation size mismatch");
  if (num_atoms < 1) throw UsageError("ormp: empty dictionary");
  if (n0 < 1) throw UsageError("ormp: sparsity must be at least 1");
  const Index steps = std::min(n0, num_atoms);

  Vec<Scalar> c = corr;  // d_j* Phi r^(l)
  RVector norms2(num_atoms);
  RVector atom_norms2(num_atoms);
  for (Index j = 0; j < num_atoms; ++j) {
    atom_norms2(j) = std::real(gram(j, j));
    norms2(j) = atom_norms2(j);
  }
  Mat<Scalar> proj = Mat<Scalar>::Zero(steps, num_atoms);  // q_l* Phi d_j
  Mat<Scalar> u = Mat<Scalar>::Zero(steps, steps);
  std::vector<Scalar> gamma;
  std::vector<bool> selected(static_cast<std::size_t>(num_atoms), false);
  SparseCodeT<Scalar> code;
  const double tol_stop = kStopRelTol * z_norm;
  double res2 = z_norm * z_norm;
  if (state) state->residual_norms.clear();

  for (Index l = 0; l < steps; ++l) {
    Index best = -1;
    double best_val = -1.0;
    for (Index j = 0; j < num_atoms; ++j) {
      if (selected[static_cast<std::size_t>(j)]) continue;
      if (!(norms2(j) > kDependentAtomRelTol * atom_norms2(j))) continue;
      const double val = std::abs(c(j)) / std::sqrt(norms2(j));
      if (val > best_val) {
        best_val = val;
        best = j;
      }
    }
    if (best < 0 || best_val <= tol_stop) break;

    const double nd = std::sqrt(norms2(best));
    // coefficients of q^(l) in the selected atoms
    Vec<Scalar> ucol = Vec<Scalar>::Zero(steps);
    ucol(l) = Scalar(1.0);
    for (Index i = 0; i < l; ++i) ucol.head(l) -= proj(i, best) * u.col(i).head(l);
    ucol /= nd;
    if (!std::isfinite(std::real(ucol(l))) || !(std::real(ucol(l)) > 0.0)) {
      throw NumericalError("ormp: Cholesky breakdown");
    }
    u.col(l) = ucol;

    proj.row(l) = ksd::conj(ucol(l)) * gram.row(best);
    for (Index i = 0; i < l; ++i) proj.row(l) += ksd::conj(ucol(i)) * gram.row(code.support[static_cast<std::size_t>(i)]);
    const Scalar g = c(best) / nd;
    for (Index j = 0; j < num_atoms; ++j) {
      c(j) -= g * ksd::conj(proj(l, j));
      norms2(j) -= std::norm(proj(l, j));
    }
    gamma.push_back(g);
    selected[static_cast<std::size_t>(best)] = true;
    code.support.push_back(best);
    res2 = std::max(0.0, res2 - std::norm(g));
    if (state) state->residual_norms.push_back(std::sqrt(res2));
  }

  const Index len = static_cast<Index>(code.support.size());
  Vec<Scalar> gvec(len);
  for (Index i = 0; i < len; ++i) gvec(i) = gamma[static_cast<std::size_t>(i)];
  const Mat<Scalar> ul = u.topLeftCorner(len, len);
  const Vec<Scalar> alpha = ul.template triangularView<Eigen::Upper>() * gvec;
  code.coefficients.assign(alpha.data(), alpha.data() + len);
  if (state) {
    state->u = ul;
    state->normalized_corr = gamma;
  }
  return code;
}

inline void check_dictionary_input(const CVector& z, const Dictionary& dict, Index n0) {
  detail::check_dims(z.size(), dict.dim(), "ormp");
  if (dict.size() < 1) throw UsageError("ormp: empty dictionary");
  if (n0 < 1) throw UsageError("ormp: sparsity must be at least 1");
  if (!all_finite(z)) throw DataError("ormp: non-finite input");
}

}  // namespace detail

/// z - D alpha for a code.
template <typename Scalar>
CVector code_residual(const CVector& z, const CMatrix& atoms, const SparseCodeT<Scalar>& code) {
  CVector r = z;
  for (std::size_t i = 0; i < code.support.size(); ++i) r -= cplx(code.coefficients[i]) * atoms.col(code.support[i]);
  return r;
}

/// Coefficients of the Phi-orthogonal projection of z onto the atoms at
/// `support`: (D_I* Phi D_I)^-1 D_I* Phi z.
inline std::vector<cplx> solve_subset(const CVector& z, const Dictionary& dict, const std::vector<Index>& support) {
  detail::check_dims(z.size(), dict.dim(), "solve_subset");
  const Index len = static_cast<Index>(support.size());
  if (len == 0) return {};
  CMatrix di(dict.dim(), len);
  for (Index i = 0; i < len; ++i) {
    const Index j = support[static_cast<std::size_t>(i)];
    if (j < 0 || j >= dict.size()) throw UsageError("solve_subset: atom index out of range");
    di.col(i) = dict.atoms().col(j);
  }
  const HermMatrix& phi = dict.metric()->phi();
  const CMatrix g = herm_gram(di, phi);
  const RVector lam = detail::hermitian_eig_standard(g).values;
  const double lmax = lam(0);
  const double lmin = lam(len - 1);
  if (!(lmin > 0.0) || lmax / lmin >= 1e12) throw NumericalError("solve_subset: singular subset Gram matrix");
  const CVector rhs = di.adjoint() * ksd::apply(phi, z);
  const CVector alpha = g.llt().solve(rhs);
  return std::vector<cplx>(alpha.data(), alpha.data() + len);
}

inline std::vector<cplx> solve_subset(const PreShape& z, const Dictionary& dict, const std::vector<Index>& support) {
  require_same_metric(z.metric(), dict.metric(), "solve_subset");
  return solve_subset(z.vector(), dict, support);
}

/// Direct complex ORMP: keeps the orthogonalized atoms delta_j as vectors,
/// final coefficients from solve_subset.
inline SparseCode ormp_naive(const CVector& z, const Dictionary& dict, Index n0, NaiveTrace* trace = nullptr) {
  detail::check_dictionary_input(z, dict, n0);
  const Metric& metric = *dict.metric();
  const HermMatrix& phi = metric.phi();
  const Index num_atoms = dict.size();
  const Index steps = std::min(n0, num_atoms);

  CMatrix delta = dict.atoms();
  CVector r = z;
  RVector atom_norms2(num_atoms);
  for (Index j = 0; j < num_atoms; ++j) atom_norms2(j) = metric.norm2(delta.col(j));
  std::vector<bool> selected(static_cast<std::size_t>(num_atoms), false);
  const double tol_stop = kStopRelTol * metric.norm(z);
  SparseCode code;

  for (Index l = 0; l < steps; ++l) {
    const CMatrix phi_delta = phi.is_identity() ? delta : CMatrix(phi.matrix() * delta);
    const CVector corr = phi_delta.adjoint() * r;
    Index best = -1;
    double best_val = -1.0;
    for (Index j = 0; j < num_atoms; ++j) {
      if (selected[static_cast<std::size_t>(j)]) continue;
      const double nd2 = std::max(0.0, delta.col(j).dot(phi_delta.col(j)).real());
      if (!(nd2 > kDependentAtomRelTol * atom_norms2(j))) continue;
      const double val = std::abs(corr(j)) / std::sqrt(nd2);
      if (val > best_val) {
        best_val = val;
        best = j;
      }
    }
    if (best < 0 || best_val <= tol_stop) break;

    const CVector q = delta.col(best) / metric.norm(delta.col(best));
    const CVector phi_q = ksd::apply(phi, q);
    delta -= q * (phi_q.adjoint() * delta);
    r -= phi_q.dot(r) * q;
    selected[static_cast<std::size_t>(best)] = true;
    code.support.push_back(best);
    if (trace) {
      trace->residuals.push_back(r);
      trace->basis.push_back(q);
    }
  }
  code.coefficients = solve_subset(z, dict, code.support);
  code.residual_norm = metric.norm(code_residual(z, dict.atoms(), code));
  return code;
}

inline SparseCode ormp_naive(const PreShape& z, const Dictionary& dict, Index n0, NaiveTrace* trace = nullptr) {
  require_same_metric(z.metric(), dict.metric(), "ormp_naive");
  return ormp_naive(z.vector(), dict, n0, trace);
}

/// Cholesky-optimized complex ORMP. `gram` must be D*Phi D (see
/// Dictionary::gram), computed once per dictionary and shared across data.
inline SparseCode ormp_cholesky(const CVector& z, const Dictionary& dict, const CMatrix& gram, Index n0,
                                CholeskyState<cplx>* state = nullptr) {
  detail::check_dictionary_input(z, dict, n0);
  if (gram.rows() != dict.size() || gram.cols() != dict.size()) throw UsageError("ormp_cholesky: Gram size mismatch");
  const Metric& metric = *dict.metric();
  const CVector corr = dict.atoms().adjoint() * ksd::apply(metric.phi(), z);
  SparseCode code = detail::ormp_gram<cplx>(gram, corr, metric.norm(z), n0, state);
  code.residual_norm = metric.norm(code_residual(z, dict.atoms(), code));
  return code;
}

inline SparseCode ormp_cholesky(const PreShape& z, const Dictionary& dict, const CMatrix& gram, Index n0,
                                CholeskyState<cplx>* state = nullptr) {
  require_same_metric(z.metric(), dict.metric(), "ormp_cholesky");
  return ormp_cholesky(z.vector(), dict, gram, n0, state);
}

/// Real ORMP under the Euclidean product, for stacked-real data whose
/// atoms are the columns of `dict_real`.
inline RealSparseCode ormp_real(const RVector& x, const RMatrix& dict_real, const RMatrix& gram, Index n0,
                                CholeskyState<double>* state = nullptr) {
  detail::check_dims(x.size(), dict_real.rows(), "ormp_real");
  if (!all_finite(x)) throw DataError("ormp_real: non-finite input");
  const RVector corr = dict_real.transpose() * x;
  RealSparseCode code = detail::ormp_gram<double>(gram, corr, x.norm(), n0, state);
  RVector r = x;
  for (std::size_t i = 0; i < code.support.size(); ++i) r -= code.coefficients[i] * dict_real.col(code.support[i]);
  code.residual_norm = r.norm();
  return code;
}

inline RealSparseCode ormp_real(const RVector& x, const RMatrix& dict_real, Index n0) {
  const RMatrix gram = dict_real.transpose() * dict_real;
  return ormp_real(x, dict_real, gram, n0);
}

}  // namespace ksd
