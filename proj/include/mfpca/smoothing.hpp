#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mfpca/surface.hpp"

namespace mfpca {

struct SmoothConfig {
  int basis_dim = 30;
  int penalty_order = 2;
  std::vector<double> lambda_grid = default_lambda_grid();
  int monotone_from_age = 65;

  // 20 log-spaced values in [1e-4, 1e4].
  static std::vector<double> default_lambda_grid();
  void validate() const;
};

// Per-year, per-age absolute smoothing residuals and their per-age RMS.
struct ResidualField {
  Eigen::MatrixXd sigma;      // T x J
  Eigen::VectorXd sigma_avg;  // J, sigma_avg_j^2 = mean_t sigma_tj^2
};

// Unconstrained penalized B-spline fit at the GCV-selected smoothing parameter.
struct PenalizedSplineFit {
  Eigen::MatrixXd basis;         // J x basis_dim design matrix
  Eigen::MatrixXd penalty;       // D'D for the difference operator D
  Eigen::VectorXd coefficients;  // minimiser of |y - B a|^2 + lambda |D a|^2
  Eigen::VectorXd fitted;        // B a
  double lambda = 0.0;
  double edf = 0.0;  // trace of the hat matrix
  double gcv = 0.0;
};

// Cubic B-spline basis with equally spaced knots extended three intervals
// beyond [x.min, x.max] (Eilers-Marx layout, so linear functions have
// linearly spaced coefficients).
Eigen::MatrixXd bspline_basis(const Eigen::VectorXd& x, int basis_dim);

// Difference matrix of the given order, (basis_dim - order) x basis_dim.
Eigen::MatrixXd difference_matrix(int basis_dim, int order);

PenalizedSplineFit fit_penalized_spline(const Eigen::VectorXd& y, const SmoothConfig& config);

// Least-squares nondecreasing fit (pool adjacent violators, unit weights).
Eigen::VectorXd isotonic_increasing(const Eigen::VectorXd& y);

// Penalized spline fit followed by an isotonic projection of the fitted values
// over ages >= config.monotone_from_age. `ages` gives the age of each entry.
Eigen::VectorXd smooth_curve(const Eigen::VectorXd& log_rates_row, const std::vector<int>& ages,
                             const SmoothConfig& config);

struct SmoothedSurface {
  MortalitySurface surface;  // kind = smoothed
  ResidualField residuals;
};

SmoothedSurface smooth_surface(const MortalitySurface& surface, const SmoothConfig& config = {});

// Smoothed curves of every population together with their residual fields,
// kept aligned so that year slices stay consistent.
struct SmoothedBundle {
  SurfaceBundle surfaces;               // kind = smoothed
  std::vector<ResidualField> residuals; // one per surface, may be empty

  SmoothedBundle slice_years(int first, int last) const;
};

SmoothedBundle smooth_bundle(const SurfaceBundle& observed, const SmoothConfig& config = {});

// Recomputes sigma_avg from a sigma matrix.
Eigen::VectorXd residual_rms(const Eigen::MatrixXd& sigma);

}  // namespace mfpca
