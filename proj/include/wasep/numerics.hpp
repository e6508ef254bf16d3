#pragma once

// Grid kernels shared by all modules. Everything here is a free function over
// Eigen expressions; the second-order pair (quadrature, derivative) is the
// reference discretization, the *4 variants are the fourth-order companions
// used where residuals must reach 1e-6 on default grids.

#include "wasep/core.hpp"

#include <cassert>

namespace wasep {

/// Trapezoidal rule on the grid. Exact for affine integrands.
template <typename Derived>
typename Derived::Scalar quadrature(const Eigen::MatrixBase<Derived>& f, const Grid& grid) {
  const Index n = f.size();
  assert(n == grid.size());
  return grid.spacing() * (f.sum() - 0.5 * (f(0) + f(n - 1)));
}

/// Extended Simpson rule with 17/48, 59/48, 43/48, 49/48 end weights; O(h^4), M >= 8.
template <typename Derived>
typename Derived::Scalar quadrature4(const Eigen::MatrixBase<Derived>& f, const Grid& grid) {
  using Scalar = typename Derived::Scalar;
  const Index n = f.size();
  assert(n == grid.size());
  if (n < 8) return quadrature(f, grid);
  static constexpr double w[4] = {17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0};
  Scalar s = f.segment(4, n - 8).sum();
  for (int k = 0; k < 4; ++k) s += w[k] * (f(k) + f(n - 1 - k));
  return grid.spacing() * s;
}

/// Centered second-order differences; second-order one-sided at the ends.
template <typename Derived>
Vector<typename Derived::Scalar> derivative(const Eigen::MatrixBase<Derived>& f, const Grid& grid) {
  const Index n = f.size();
  assert(n == grid.size() && n >= 3);
  const double h = grid.spacing();
  Vector<typename Derived::Scalar> d(n);
  d(0) = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
  d.segment(1, n - 2) = (f.segment(2, n - 2) - f.segment(0, n - 2)) / (2.0 * h);
  d(n - 1) = (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h);
  return d;
}

/// Five-point fourth-order first derivative; M >= 5.
template <typename Derived>
Vector<typename Derived::Scalar> derivative4(const Eigen::MatrixBase<Derived>& f, const Grid& grid) {
  const Index n = f.size();
  assert(n == grid.size());
  if (n < 5) return derivative(f, grid);
  const double c = 1.0 / (12.0 * grid.spacing());
  Vector<typename Derived::Scalar> d(n);
  d(0) = c * (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4));
  d(1) = c * (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4));
  if (n > 4)
    d.segment(2, n - 4) = c * (f.segment(0, n - 4) - 8.0 * f.segment(1, n - 4) +
                               8.0 * f.segment(3, n - 4) - f.segment(4, n - 4));
  d(n - 2) = c * (3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4) - f(n - 5));
  d(n - 1) = c * (25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3) - 16.0 * f(n - 4) +
                  3.0 * f(n - 5));
  return d;
}

/// Three-point second derivative; first-order one-sided four-point at the ends.
template <typename Derived>
Vector<typename Derived::Scalar> second_derivative(const Eigen::MatrixBase<Derived>& f,
                                                   const Grid& grid) {
  const Index n = f.size();
  assert(n == grid.size() && n >= 4);
  const double ih2 = 1.0 / (grid.spacing() * grid.spacing());
  Vector<typename Derived::Scalar> d(n);
  d(0) = ih2 * (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3));
  d.segment(1, n - 2) = ih2 * (f.segment(0, n - 2) - 2.0 * f.segment(1, n - 2) + f.segment(2, n - 2));
  d(n - 1) = ih2 * (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4));
  return d;
}

/// Fourth-order second derivative (five-point interior, six-point one-sided); M >= 6.
template <typename Derived>
Vector<typename Derived::Scalar> second_derivative4(const Eigen::MatrixBase<Derived>& f,
                                                    const Grid& grid) {
  const Index n = f.size();
  assert(n == grid.size());
  if (n < 6) return second_derivative(f, grid);
  const double c = 1.0 / (12.0 * grid.spacing() * grid.spacing());
  Vector<typename Derived::Scalar> d(n);
  d(0) = c * (45.0 * f(0) - 154.0 * f(1) + 214.0 * f(2) - 156.0 * f(3) + 61.0 * f(4) - 10.0 * f(5));
  d(1) = c * (10.0 * f(0) - 15.0 * f(1) - 4.0 * f(2) + 14.0 * f(3) - 6.0 * f(4) + f(5));
  d.segment(2, n - 4) = c * (-f.segment(0, n - 4) + 16.0 * f.segment(1, n - 4) -
                             30.0 * f.segment(2, n - 4) + 16.0 * f.segment(3, n - 4) -
                             f.segment(4, n - 4));
  d(n - 2) = c * (10.0 * f(n - 1) - 15.0 * f(n - 2) - 4.0 * f(n - 3) + 14.0 * f(n - 4) -
                  6.0 * f(n - 5) + f(n - 6));
  d(n - 1) = c * (45.0 * f(n - 1) - 154.0 * f(n - 2) + 214.0 * f(n - 3) - 156.0 * f(n - 4) +
                  61.0 * f(n - 5) - 10.0 * f(n - 6));
  return d;
}

/// Running integral F(u_i) = int_{-1}^{u_i} f, cumulative trapezoid.
template <typename Derived>
Vector<typename Derived::Scalar> cumulative_integral(const Eigen::MatrixBase<Derived>& f,
                                                     const Grid& grid) {
  const Index n = f.size();
  const double h = grid.spacing();
  Vector<typename Derived::Scalar> c(n);
  c(0) = 0.0;
  for (Index i = 0; i + 1 < n; ++i) c(i + 1) = c(i) + 0.5 * h * (f(i) + f(i + 1));
  return c;
}

/// Running integral with the cubic panel rule h/24 (-f0 + 13 f1 + 13 f2 - f3); O(h^4).
template <typename Derived>
Vector<typename Derived::Scalar> cumulative_integral4(const Eigen::MatrixBase<Derived>& f,
                                                      const Grid& grid) {
  const Index n = f.size();
  if (n < 4) return cumulative_integral(f, grid);
  const double c = grid.spacing() / 24.0;
  Vector<typename Derived::Scalar> out(n);
  out(0) = 0.0;
  out(1) = c * (9.0 * f(0) + 19.0 * f(1) - 5.0 * f(2) + f(3));
  for (Index i = 1; i + 2 < n; ++i)
    out(i + 1) = out(i) + c * (-f(i - 1) + 13.0 * f(i) + 13.0 * f(i + 1) - f(i + 2));
  out(n - 1) = out(n - 2) + c * (9.0 * f(n - 1) + 19.0 * f(n - 2) - 5.0 * f(n - 3) + f(n - 4));
  return out;
}

/// Thomas algorithm for sub/diag/super bands (sub(0) and super(n-1) unused).
/// Throws singular_matrix on a vanishing pivot.
Vec solve_tridiagonal(const Vec& sub, const Vec& diag, const Vec& super, const Vec& rhs);

/// Three-point time derivative of the columns of `values` on a (possibly
/// nonuniform) clock: centered inside, second-order one-sided at the ends.
Mat time_derivative(const std::vector<double>& times, const Mat& values);

/// Trapezoidal rule in time for samples f(t_k).
double time_integral(const std::vector<double>& times, const Vec& samples);

}  // namespace wasep
