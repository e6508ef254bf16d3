#include "wasep/core.hpp"
#include "wasep/numerics.hpp"

#include <algorithm>
#include <sstream>

namespace wasep {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::bracket_not_found: return "bracket_not_found";
    case ErrorKind::endpoint_mismatch: return "endpoint_mismatch";
    case ErrorKind::no_convergence: return "no_convergence";
    case ErrorKind::singular_matrix: return "singular_matrix";
    case ErrorKind::degenerate_mobility: return "degenerate_mobility";
    case ErrorKind::monotonicity_loss: return "monotonicity_loss";
    case ErrorKind::dimension_guard: return "dimension_guard";
  }
  return "unknown";
}

Params::Params(double field, double rho_minus, double rho_plus)
    : field_(field), rho_minus_(rho_minus), rho_plus_(rho_plus) {
  if (!std::isfinite(field) || !(rho_minus > 0.0) || !(rho_minus < rho_plus) || !(rho_plus < 1.0)) {
    std::ostringstream os;
    os << "invalid params: need finite E and 0 < rho_minus < rho_plus < 1, got E=" << field
       << " rho_minus=" << rho_minus << " rho_plus=" << rho_plus;
    throw NumericalError(ErrorKind::invalid_input, os.str());
  }
  phi_minus_ = std::log(rho_minus / (1.0 - rho_minus));
  phi_plus_ = std::log(rho_plus / (1.0 - rho_plus));
  E0_ = 0.5 * (phi_plus_ - phi_minus_);
}

Grid::Grid(Index size) : size_(size) {
  if (size < 3) throw NumericalError(ErrorKind::invalid_input, "grid needs at least 3 nodes");
}

Vec Grid::nodes() const {
  Vec u(size_);
  for (Index i = 0; i < size_; ++i) u(i) = node(i);
  return u;
}

DensityProfile::DensityProfile(Grid grid, Vec values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw NumericalError(ErrorKind::invalid_input, "density profile size does not match grid");
  for (Index i = 0; i < values_.size(); ++i) {
    if (!(values_(i) >= 0.0 && values_(i) <= 1.0))
      throw NumericalError(ErrorKind::domain, "density value outside [0, 1]");
  }
}

DensityProfile DensityProfile::from_function(const Grid& grid,
                                             const std::function<double(double)>& f) {
  Vec v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) v(i) = f(grid.node(i));
  return DensityProfile(grid, std::move(v));
}

PotentialProfile::PotentialProfile(Grid grid, Vec values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw NumericalError(ErrorKind::invalid_input, "potential profile size does not match grid");
}

SpacetimePath::SpacetimePath(Grid grid, std::vector<double> times, Mat values)
    : grid_(grid), times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty() || values_.rows() != grid_.size() ||
      values_.cols() != static_cast<Index>(times_.size()))
    throw NumericalError(ErrorKind::invalid_input, "path shape does not match grid and times");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1]))
      throw NumericalError(ErrorKind::invalid_input, "path times must be strictly increasing");
  }
}

SpacetimePath SpacetimePath::shifted(double dt) const {
  std::vector<double> t = times_;
  for (double& x : t) x += dt;
  return SpacetimePath(grid_, std::move(t), values_);
}

SpacetimePath SpacetimePath::reversed() const {
  const std::size_t n = times_.size();
  std::vector<double> t(n);
  const double a = times_.front(), b = times_.back();
  for (std::size_t k = 0; k < n; ++k) t[k] = a + b - times_[n - 1 - k];
  return SpacetimePath(grid_, std::move(t), values_.rowwise().reverse());
}

double mobility(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw NumericalError(ErrorKind::domain, "mobility argument outside [0, 1]");
  return a * (1.0 - a);
}

Vec mobility(const Vec& a) {
  Vec out(a.size());
  for (Index i = 0; i < a.size(); ++i) out(i) = mobility(a(i));
  return out;
}

double density_of_potential(double phi) {
  if (phi >= 0.0) return 1.0 / (1.0 + std::exp(-phi));
  const double e = std::exp(phi);
  return e / (1.0 + e);
}

Vec density_of_potential(const Vec& phi) {
  return phi.unaryExpr([](double p) { return density_of_potential(p); });
}

double potential_of_density(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw NumericalError(ErrorKind::domain, "logit argument outside (0, 1)");
  return std::log(rho) - std::log1p(-rho);
}

Vec potential_of_density_clipped(const Vec& rho, Index* clipped) {
  Index count = 0;
  Vec out(rho.size());
  for (Index i = 0; i < rho.size(); ++i) {
    double r = rho(i);
    if (r < kClipEpsilon || r > 1.0 - kClipEpsilon) {
      r = std::clamp(r, kClipEpsilon, 1.0 - kClipEpsilon);
      ++count;
    }
    out(i) = std::log(r) - std::log1p(-r);
  }
  if (clipped) *clipped = count;
  return out;
}

double bernoulli_relative_entropy(double rho, double ref) {
  double v = 0.0;
  if (rho > 0.0) v += rho * std::log(rho / ref);
  if (rho < 1.0) v += (1.0 - rho) * std::log((1.0 - rho) / (1.0 - ref));
  return v;
}

double interpolate_linear(const Grid& grid, const Vec& values, double u) {
  const double h = grid.spacing();
  const Index n = grid.size();
  double s = (u + 1.0) / h;
  Index i = std::clamp<Index>(static_cast<Index>(std::floor(s)), 0, n - 2);
  const double t = s - static_cast<double>(i);
  return (1.0 - t) * values(i) + t * values(i + 1);
}

double interpolate_cubic(const Grid& grid, const Vec& values, double u) {
  const Index n = grid.size();
  if (n < 4) return interpolate_linear(grid, values, u);
  const double h = grid.spacing();
  const double s = (u + 1.0) / h;
  Index i0 = std::clamp<Index>(static_cast<Index>(std::floor(s)) - 1, 0, n - 4);
  const double x = s - static_cast<double>(i0);  // stencil nodes at 0, 1, 2, 3
  double out = 0.0;
  for (int k = 0; k < 4; ++k) {
    double w = 1.0;
    for (int m = 0; m < 4; ++m) {
      if (m != k) w *= (x - m) / static_cast<double>(k - m);
    }
    out += w * values(i0 + k);
  }
  return out;
}

Vec solve_tridiagonal(const Vec& sub, const Vec& diag, const Vec& super, const Vec& rhs) {
  const Index n = diag.size();
  Vec c(n), d(n), x(n);
  double beta = diag(0);
  if (beta == 0.0 || !std::isfinite(beta))
    throw NumericalError(ErrorKind::singular_matrix, "zero pivot in tridiagonal solve");
  c(0) = n > 1 ? super(0) / beta : 0.0;
  d(0) = rhs(0) / beta;
  for (Index i = 1; i < n; ++i) {
    beta = diag(i) - sub(i) * c(i - 1);
    if (std::abs(beta) < 1e-300 || !std::isfinite(beta))
      throw NumericalError(ErrorKind::singular_matrix, "zero pivot in tridiagonal solve");
    c(i) = i + 1 < n ? super(i) / beta : 0.0;
    d(i) = (rhs(i) - sub(i) * d(i - 1)) / beta;
  }
  x(n - 1) = d(n - 1);
  for (Index i = n - 2; i >= 0; --i) x(i) = d(i) - c(i) * x(i + 1);
  return x;
}

Mat time_derivative(const std::vector<double>& t, const Mat& v) {
  const Index K = v.cols();
  Mat d(v.rows(), K);
  if (K == 1) {
    d.setZero();
    return d;
  }
  if (K == 2) {
    const Vec s = (v.col(1) - v.col(0)) / (t[1] - t[0]);
    d.col(0) = s;
    d.col(1) = s;
    return d;
  }
  // Three-point Lagrange derivative at the middle node or an end node.
  auto weights = [](double a, double b, double c, double at) {
    return Eigen::Vector3d((2 * at - b - c) / ((a - b) * (a - c)), (2 * at - a - c) / ((b - a) * (b - c)),
                           (2 * at - a - b) / ((c - a) * (c - b)));
  };
  for (Index k = 0; k < K; ++k) {
    const Index j = std::clamp<Index>(k, 1, K - 2);
    const Eigen::Vector3d w = weights(t[j - 1], t[j], t[j + 1], t[k]);
    d.col(k) = w(0) * v.col(j - 1) + w(1) * v.col(j) + w(2) * v.col(j + 1);
  }
  return d;
}

double time_integral(const std::vector<double>& t, const Vec& f) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) s += 0.5 * (t[k + 1] - t[k]) * (f(k) + f(k + 1));
  return s;
}

}  // namespace wasep
