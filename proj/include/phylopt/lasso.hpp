#pragma once

// L1-penalised least squares by cyclic coordinate descent.
//
// For a design X (m x p) and response y the solver minimises
//
//   (1 / 2m) * sum_i (y_i - b0 - sum_j x_ij b_j)^2 + lambda * sum_j sd_j |b_j|
//
// with an unpenalised intercept b0 and sd_j the population standard deviation
// of column j. This is the plain lasso on centred y and unit-variance columns;
// coefficients are reported on the original column scale. Constant columns
// carry no information and are dropped (their coefficient stays 0).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "phylopt/errors.hpp"

namespace phylopt::lasso {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// sign(z) * max(|z| - lambda, 0)
template <typename Scalar>
Scalar soft_threshold(Scalar z, Scalar lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return Scalar(0);
}

struct SolverOptions {
  double tolerance = 1e-6;  // max |coefficient update| in a sweep, standardised scale
  int max_sweeps = 10000;
  // once updates stall, every KKT residual must also be below this times lambda
  double kkt_tolerance = 1e-5;
};

/// Centred, unit-variance copy of a problem restricted to its non-constant
/// columns.
template <typename Scalar>
struct Standardized {
  Matrix<Scalar> x;           // m x kept.size()
  Vector<Scalar> y;           // centred response
  Vector<Scalar> means;       // per original column
  Vector<Scalar> scales;      // population sd per original column
  Scalar y_mean = 0;
  std::vector<Eigen::Index> kept;
  std::vector<Eigen::Index> dropped;

  Eigen::Index rows() const { return y.size(); }
  Eigen::Index columns() const { return means.size(); }

  /// Maps standardised coefficients over `kept` back to the original scale.
  Vector<Scalar> unscale(const Vector<Scalar>& beta_std) const {
    Vector<Scalar> beta = Vector<Scalar>::Zero(columns());
    for (std::size_t k = 0; k < kept.size(); ++k)
      beta(kept[k]) = beta_std(static_cast<Eigen::Index>(k)) / scales(kept[k]);
    return beta;
  }
  Vector<Scalar> rescale(const Vector<Scalar>& beta) const {
    Vector<Scalar> out(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k)
      out(static_cast<Eigen::Index>(k)) = beta(kept[k]) * scales(kept[k]);
    return out;
  }
  Scalar intercept(const Vector<Scalar>& beta) const { return y_mean - means.dot(beta); }
};

template <typename DerivedX, typename DerivedY>
Standardized<typename DerivedX::Scalar> standardize(const Eigen::MatrixBase<DerivedX>& x,
                                                    const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const auto m = x.rows();
  if (m < 2) throw DomainError("lasso needs at least two rows");
  if (y.size() != m) throw DomainError("lasso response length does not match the design");
  if (!x.allFinite() || !y.allFinite()) throw DomainError("lasso inputs must be finite");

  Standardized<Scalar> s;
  s.y_mean = y.mean();
  s.y = y.array() - s.y_mean;
  s.means = x.colwise().mean().transpose();
  s.scales.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Scalar var = (x.col(j).array() - s.means(j)).square().mean();
    s.scales(j) = std::sqrt(var);
    const Scalar floor = Scalar(1e-12) * std::max(Scalar(1), std::abs(s.means(j)));
    (s.scales(j) > floor ? s.kept : s.dropped).push_back(j);
  }
  s.x.resize(m, static_cast<Eigen::Index>(s.kept.size()));
  for (std::size_t k = 0; k < s.kept.size(); ++k) {
    const auto j = s.kept[k];
    s.x.col(static_cast<Eigen::Index>(k)) = (x.col(j).array() - s.means(j)) / s.scales(j);
  }
  return s;
}

template <typename Scalar>
struct StandardFit {
  Vector<Scalar> beta;  // over Standardized::kept
  int sweeps = 0;
  bool converged = false;
};

template <typename Scalar>
bool kkt_satisfied(const Standardized<Scalar>& s, const Vector<Scalar>& beta, const Vector<Scalar>& residual,
                   Scalar lambda, const SolverOptions& options) {
  if (lambda <= 0) return true;
  const Vector<Scalar> grad = s.x.transpose() * residual / static_cast<Scalar>(s.rows());
  const Scalar limit = Scalar(options.kkt_tolerance) * lambda;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const Scalar v = beta(j) != 0 ? std::abs(grad(j) - (beta(j) > 0 ? lambda : -lambda))
                                  : std::abs(grad(j)) - lambda;
    if (v > limit) return false;
  }
  return true;
}

/// Coordinate descent on a standardised problem, optionally warm-started.
template <typename Scalar>
StandardFit<Scalar> solve_standardized(const Standardized<Scalar>& s, Scalar lambda,
                                       const Vector<Scalar>* warm_start = nullptr,
                                       const SolverOptions& options = {}) {
  if (!(lambda >= 0)) throw DomainError("lambda must be non-negative");
  const auto p = s.x.cols();
  const auto m = static_cast<Scalar>(s.rows());
  StandardFit<Scalar> fit;
  fit.beta = warm_start ? *warm_start : Vector<Scalar>::Zero(p);
  if (fit.beta.size() != p) throw DomainError("warm start has the wrong length");
  Vector<Scalar> residual = s.y - s.x * fit.beta;
  while (fit.sweeps < options.max_sweeps) {
    ++fit.sweeps;
    Scalar max_delta = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const Scalar old = fit.beta(j);
      const Scalar z = s.x.col(j).dot(residual) / m + old;
      const Scalar updated = soft_threshold(z, lambda);
      const Scalar delta = updated - old;
      if (delta != 0) {
        residual.noalias() -= delta * s.x.col(j);
        fit.beta(j) = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta < Scalar(options.tolerance) && kkt_satisfied(s, fit.beta, residual, lambda, options)) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

template <typename Scalar>
struct Fit {
  Vector<Scalar> coefficients;  // original scale, one per column
  Scalar intercept = 0;
  int sweeps = 0;
  bool converged = false;
};

/// Minimises the objective above at one lambda. Non-convergence within
/// options.max_sweeps is reported through Fit::converged, never silently.
template <typename DerivedX, typename DerivedY>
Fit<typename DerivedX::Scalar> coordinate_descent(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
    typename DerivedX::Scalar lambda,
    const std::optional<Vector<typename DerivedX::Scalar>>& warm_start = std::nullopt,
    const SolverOptions& options = {}) {
  using Scalar = typename DerivedX::Scalar;
  const auto s = standardize(x, y);
  std::optional<Vector<Scalar>> warm;
  if (warm_start) {
    if (warm_start->size() != x.cols()) throw DomainError("warm start has the wrong length");
    warm = s.rescale(*warm_start);
  }
  const auto sf = solve_standardized(s, lambda, warm ? &*warm : nullptr, options);
  Fit<Scalar> fit;
  fit.coefficients = s.unscale(sf.beta);
  fit.intercept = s.intercept(fit.coefficients);
  fit.sweeps = sf.sweeps;
  fit.converged = sf.converged;
  return fit;
}

/// Value of the minimised objective at (intercept, coefficients).
template <typename DerivedX, typename DerivedY, typename DerivedB>
typename DerivedX::Scalar penalized_objective(const Eigen::MatrixBase<DerivedX>& x,
                                              const Eigen::MatrixBase<DerivedY>& y,
                                              const Eigen::MatrixBase<DerivedB>& coefficients,
                                              typename DerivedX::Scalar intercept,
                                              typename DerivedX::Scalar lambda) {
  using Scalar = typename DerivedX::Scalar;
  const auto m = static_cast<Scalar>(x.rows());
  const Vector<Scalar> residual = (y - x * coefficients).array() - intercept;
  Scalar penalty = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Scalar sd = std::sqrt((x.col(j).array() - x.col(j).mean()).square().mean());
    penalty += sd * std::abs(coefficients(j));
  }
  return residual.squaredNorm() / (2 * m) + lambda * penalty;
}

struct PathEntry {
  Eigen::Index column = 0;
  std::size_t grid_index = 0;  // first grid point with a nonzero coefficient
  int sign = 0;                // +1 or -1 at entry
  double magnitude = 0.0;      // |coefficient| at entry, original scale
};

template <typename Scalar>
struct Path {
  std::vector<Scalar> lambdas;                 // decreasing
  std::vector<Vector<Scalar>> coefficients;    // original scale, per grid point
  std::vector<Scalar> intercepts;
  std::vector<bool> converged;
  std::vector<PathEntry> entries;              // in entry order
  std::vector<Eigen::Index> dropped;           // constant columns
  Eigen::Index columns = 0;

  bool all_converged() const { return std::all_of(converged.begin(), converged.end(), [](bool c) { return c; }); }
};

struct PathOptions {
  std::size_t grid_size = 100;
  double min_ratio = 1e-3;
  SolverOptions solver;
};

/// lambda_max = max_j |<x~_j, y - mean(y)>| / m on standardised columns.
template <typename Scalar>
Scalar lambda_max(const Standardized<Scalar>& s) {
  Scalar top = 0;
  // same arithmetic as the first coordinate update, so grid[0] yields exact zeros
  for (Eigen::Index j = 0; j < s.x.cols(); ++j)
    top = std::max(top, std::abs(s.x.col(j).dot(s.y) / static_cast<Scalar>(s.rows())));
  return top;
}

/// Warm-started solves over a geometric grid from lambda_max down to
/// min_ratio * lambda_max, recording when each column first turns nonzero.
/// Ties in entry order go to the larger |coefficient|, then the lower column.
template <typename DerivedX, typename DerivedY>
Path<typename DerivedX::Scalar> lasso_path(const Eigen::MatrixBase<DerivedX>& x,
                                           const Eigen::MatrixBase<DerivedY>& y,
                                           const PathOptions& options = {}) {
  using Scalar = typename DerivedX::Scalar;
  if (options.grid_size < 2) throw DomainError("lasso path needs at least two grid points");
  if (!(options.min_ratio > 0 && options.min_ratio < 1)) throw DomainError("min_ratio must lie in (0, 1)");
  const auto s = standardize(x, y);
  Path<Scalar> path;
  path.columns = x.cols();
  path.dropped = s.dropped;

  const Scalar top = lambda_max(s);
  const auto k = options.grid_size;
  for (std::size_t i = 0; i < k; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(k - 1);
    path.lambdas.push_back(i == 0 ? top : top * static_cast<Scalar>(std::pow(options.min_ratio, frac)));
  }

  Vector<Scalar> beta_std = Vector<Scalar>::Zero(s.x.cols());
  std::vector<bool> entered(static_cast<std::size_t>(x.cols()), false);
  for (std::size_t i = 0; i < k; ++i) {
    auto sf = solve_standardized(s, path.lambdas[i], &beta_std, options.solver);
    beta_std = sf.beta;
    auto beta = s.unscale(beta_std);
    std::vector<PathEntry> fresh;
    for (std::size_t kk = 0; kk < s.kept.size(); ++kk) {
      const auto j = s.kept[kk];
      if (entered[static_cast<std::size_t>(j)] || beta(j) == 0) continue;
      entered[static_cast<std::size_t>(j)] = true;
      fresh.push_back({j, i, beta(j) > 0 ? 1 : -1, static_cast<double>(std::abs(beta(j)))});
    }
    std::sort(fresh.begin(), fresh.end(), [](const PathEntry& a, const PathEntry& b) {
      if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
      return a.column < b.column;
    });
    path.entries.insert(path.entries.end(), fresh.begin(), fresh.end());
    path.intercepts.push_back(s.intercept(beta));
    path.coefficients.push_back(std::move(beta));
    path.converged.push_back(sf.converged);
  }
  return path;
}

enum class Direction { positive, negative };

struct GeneEffect {
  Eigen::Index gene = 0;        // column index
  Direction direction = Direction::positive;
  std::size_t rank = 0;         // 0 = entered first
  std::size_t grid_index = 0;
};

/// Columns in entry order; columns that never enter are omitted.
template <typename Scalar>
std::vector<GeneEffect> rank_genes(const Path<Scalar>& path) {
  std::vector<GeneEffect> out;
  for (std::size_t r = 0; r < path.entries.size(); ++r) {
    const auto& e = path.entries[r];
    out.push_back({e.column, e.sign > 0 ? Direction::positive : Direction::negative, r, e.grid_index});
  }
  return out;
}

/// Tab-separated dump: header "lambda" + labels, then one row per grid point.
template <typename Scalar>
void write_path_tsv(std::ostream& os, const Path<Scalar>& path, const std::vector<std::string>& labels) {
  os << "lambda";
  for (Eigen::Index j = 0; j < path.columns; ++j)
    os << '\t' << (static_cast<std::size_t>(j) < labels.size() ? labels[static_cast<std::size_t>(j)] : "x" + std::to_string(j));
  os << '\n';
  const auto precision = os.precision(17);
  for (std::size_t i = 0; i < path.lambdas.size(); ++i) {
    os << path.lambdas[i];
    for (Eigen::Index j = 0; j < path.columns; ++j) os << '\t' << path.coefficients[i](j);
    os << '\n';
  }
  os.precision(precision);
}

/// Gene-labelled 0/1 design built from evaluated configurations.
template <typename Scalar>
struct LassoProblem {
  Matrix<Scalar> x;  // configurations x genes, entries in {0, 1}
  Vector<Scalar> y;  // branch supports
  std::vector<std::string> labels;

  void validate() const {
    if (x.rows() < 2) throw DomainError("lasso problem needs at least two configurations");
    if (x.cols() < 1) throw DomainError("lasso problem needs at least one gene");
    if (y.size() != x.rows()) throw DomainError("lasso response length does not match the design");
    if (!labels.empty() && labels.size() != static_cast<std::size_t>(x.cols()))
      throw DomainError("one label per gene column is required");
    if (((x.array() != Scalar(0)) && (x.array() != Scalar(1))).any())
      throw DomainError("lasso design entries must be 0 or 1");
  }
};

}  // namespace phylopt::lasso
