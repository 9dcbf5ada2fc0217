#pragma once

// Reference computations used by the tests. They avoid the library's own
// numerical paths: quadrature instead of closed-form Gram entries, grid
// search instead of closed-form distances, plain gradient ascent instead of
// eigensolvers.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

struct Rule {
  std::vector<double> x, w;  // nodes and weights on [-1, 1]
};

// Gauss-Legendre nodes by Newton iteration on P_n.
inline Rule gauss_legendre(int n) {
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// Integral of f over [a, b] with the rule.
template <typename F>
auto integrate(const Rule& r, double a, double b, F&& f) -> decltype(f(0.0)) {
  decltype(f(0.0)) s{};
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + h * r.x[i]);
  return h * s;
}

// Cubic B-spline written from its convolution definition's piecewise form.
inline double bspline3(double t) {
  const double a = std::abs(t);
  if (a >= 2.0) return 0.0;
  if (a >= 1.0) return (2.0 - a) * (2.0 - a) * (2.0 - a) / 6.0;
  return 2.0 / 3.0 - a * a + 0.5 * a * a * a;
}

// Periodic basis function: phi_n(t) = sum_p B(M (t + p) - n).
inline double phi(int m, int n, double t) {
  double s = 0.0;
  for (int p = -3; p <= 3; ++p) s += bspline3(m * (t + p) - n);
  return s;
}

// Curve value Gamma z at t.
inline cplx curve(const CVec& z, double t) {
  cplx v = 0.0;
  for (int n = 0; n < z.size(); ++n) v += z(n) * phi(static_cast<int>(z.size()), n, t);
  return v;
}

// Integral over [0, 1] of f, split at the knots k / M with the 64-point rule.
template <typename F>
auto integrate_knots(int m, F&& f) -> decltype(f(0.0)) {
  static const Rule rule = gauss_legendre(64);
  decltype(f(0.0)) s{};
  for (int k = 0; k < m; ++k) s += integrate(rule, static_cast<double>(k) / m, static_cast<double>(k + 1) / m, f);
  return s;
}

inline double gram_entry(int m, int a, int b) {
  return integrate_knots(m, [&](double t) { return phi(m, a, t) * phi(m, b, t); });
}

inline cplx inner(const CVec& z, const CVec& w, const CMat& phi_mat) { return (z.adjoint() * phi_mat * w)(0, 0); }
inline double norm(const CVec& z, const CMat& phi_mat) { return std::sqrt(std::max(0.0, inner(z, z, phi_mat).real())); }

// min over a = lambda e^{i theta} on a grid of |a z - w|.
inline double grid_full_distance(const CVec& z, const CVec& w, const CMat& phi_mat, int n_theta = 720,
                                 int n_lambda = 200) {
  double best = 1e300;
  for (int i = 0; i < n_theta; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n_theta;
    for (int j = 0; j <= n_lambda; ++j) {
      const double lam = static_cast<double>(j) / n_lambda;
      best = std::min(best, norm(CVec(std::polar(lam, th) * z - w), phi_mat));
    }
  }
  return best;
}

// min over a theta grid of |e^{i theta} z - w|, expanded as
// |z|^2 + |w|^2 - 2 Re(e^{-i theta} z* Phi w) so 1e5 samples stay cheap.
inline double grid_partial_distance(const CVec& z, const CVec& w, const CMat& phi_mat, int n_theta = 100000) {
  const cplx c = inner(z, w, phi_mat);
  const double zz = inner(z, z, phi_mat).real(), ww = inner(w, w, phi_mat).real();
  double best = 1e300;
  for (int i = 0; i < n_theta; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n_theta;
    const double v = zz + ww - 2.0 * (std::conj(std::polar(1.0, th)) * c).real();
    best = std::min(best, std::sqrt(std::max(0.0, v)));
  }
  return best;
}

// max sum_k |m* z_k|^2 over unit centered m (landmark metric), by projected
// gradient ascent from `restarts` random starts.
inline double frechet_objective_max(const std::vector<CVec>& z, int restarts, std::mt19937_64& rng) {
  const int n = static_cast<int>(z.front().size());
  std::normal_distribution<double> g;
  auto project = [&](CVec m) {
    m.array() -= m.mean();
    return CVec(m / m.norm());
  };
  auto objective = [&](const CVec& m) {
    double s = 0.0;
    for (const CVec& zk : z) s += std::norm(m.dot(zk));
    return s;
  };
  double best = 0.0;
  for (int r = 0; r < restarts; ++r) {
    CVec m(n);
    for (int i = 0; i < n; ++i) m(i) = cplx(g(rng), g(rng));
    m = project(m);
    double step = 0.5;
    double f = objective(m);
    for (int it = 0; it < 5000 && step > 1e-14; ++it) {
      CVec grad = CVec::Zero(n);
      for (const CVec& zk : z) grad += zk * zk.dot(m);  // z_k (z_k* m)
      const CVec cand = project(m + step * grad);
      const double fc = objective(cand);
      if (fc > f) {
        m = cand;
        f = fc;
        step *= 1.2;
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, f);
  }
  return best;
}

}  // namespace oracle
