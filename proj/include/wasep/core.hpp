#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wasep {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class ErrorKind {
  domain,
  invalid_input,
  bracket_not_found,
  endpoint_mismatch,
  no_convergence,
  singular_matrix,
  degenerate_mobility,
  monotonicity_loss,
  dimension_guard,
};

const char* to_string(ErrorKind kind);

/// Every numerical failure in the library is reported through this type.
/// `best_residual` carries the closest approach for iterative failures.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(ErrorKind kind, const std::string& what, double best_residual = NAN)
      : std::runtime_error(what), kind_(kind), best_residual_(best_residual) {}

  ErrorKind kind() const { return kind_; }
  double best_residual() const { return best_residual_; }

 private:
  ErrorKind kind_;
  double best_residual_;
};

/// Physical parameters: external field and reservoir densities.
class Params {
 public:
  Params(double field, double rho_minus, double rho_plus);

  double field() const { return field_; }
  double rho_minus() const { return rho_minus_; }
  double rho_plus() const { return rho_plus_; }
  double phi_minus() const { return phi_minus_; }
  double phi_plus() const { return phi_plus_; }
  /// Reversibility threshold (phi_+ - phi_-)/2.
  double E0() const { return E0_; }

  Params with_field(double field) const { return Params(field, rho_minus_, rho_plus_); }

 private:
  double field_;
  double rho_minus_;
  double rho_plus_;
  double phi_minus_;
  double phi_plus_;
  double E0_;
};

/// Uniform grid on [-1, 1] with M >= 3 nodes, both endpoints included.
class Grid {
 public:
  explicit Grid(Index size);

  Index size() const { return size_; }
  double spacing() const { return 2.0 / static_cast<double>(size_ - 1); }
  double node(Index i) const {
    return i == size_ - 1 ? 1.0 : -1.0 + static_cast<double>(i) * spacing();
  }
  Vec nodes() const;

  friend bool operator==(const Grid& a, const Grid& b) { return a.size_ == b.size_; }

 private:
  Index size_;
};

/// Grid function with values in [0, 1].
class DensityProfile {
 public:
  DensityProfile(Grid grid, Vec values);

  static DensityProfile from_function(const Grid& grid, const std::function<double(double)>& f);

  const Grid& grid() const { return grid_; }
  const Vec& values() const { return values_; }
  double operator[](Index i) const { return values_[i]; }

 private:
  Grid grid_;
  Vec values_;
};

class PotentialProfile {
 public:
  PotentialProfile(Grid grid, Vec values);

  const Grid& grid() const { return grid_; }
  const Vec& values() const { return values_; }
  double operator[](Index i) const { return values_[i]; }

 private:
  Grid grid_;
  Vec values_;
};

/// Density profiles on a common grid at strictly increasing times.
/// Column k of `values()` is the profile at `times()[k]`.
class SpacetimePath {
 public:
  SpacetimePath(Grid grid, std::vector<double> times, Mat values);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& times() const { return times_; }
  const Mat& values() const { return values_; }
  Index steps() const { return static_cast<Index>(times_.size()); }
  double horizon() const { return times_.back() - times_.front(); }
  DensityProfile profile(Index k) const { return DensityProfile(grid_, values_.col(k)); }

  /// Same profiles with every time shifted by `dt`.
  SpacetimePath shifted(double dt) const;
  /// Profiles in reverse order on the reflected clock t -> t_end + t_start - t.
  SpacetimePath reversed() const;

 private:
  Grid grid_;
  std::vector<double> times_;
  Mat values_;
};

// Elementary functions of the model.

/// chi(a) = a(1 - a); throws for a outside [0, 1].
double mobility(double a);
Vec mobility(const Vec& a);

/// e^phi / (1 + e^phi), overflow-safe.
double density_of_potential(double phi);
Vec density_of_potential(const Vec& phi);

/// log(rho / (1 - rho)); throws for rho outside (0, 1).
double potential_of_density(double rho);

constexpr double kClipEpsilon = 1e-12;

/// logit after clipping to [eps, 1 - eps]; `clipped` counts the clipped nodes.
Vec potential_of_density_clipped(const Vec& rho, Index* clipped = nullptr);

/// x log x with 0 log 0 = 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// rho log rho + (1 - rho) log(1 - rho).
inline double bernoulli_entropy(double rho) { return xlogx(rho) + xlogx(1.0 - rho); }

/// Bernoulli relative entropy of rho with respect to reference density `ref`.
double bernoulli_relative_entropy(double rho, double ref);

/// Linear interpolation of a grid function at u in [-1, 1].
double interpolate_linear(const Grid& grid, const Vec& values, double u);

/// Cubic (four-point Lagrange) interpolation of a grid function at u.
double interpolate_cubic(const Grid& grid, const Vec& values, double u);

/// Sup norm of a - b.
inline double sup_distance(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace wasep
