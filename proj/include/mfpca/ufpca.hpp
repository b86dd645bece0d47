#pragma once

#include <Eigen/Dense>
#include <optional>

#include "mfpca/component_rule.hpp"

namespace mfpca {

// Observation weights over T years. `power` selects how the centred rows are
// scaled before the eigenanalysis: 1 multiplies by w_t as written in the
// weighted FPCA literature, 0.5 gives the usual sqrt-weight weighted PCA.
struct WeightScheme {
  std::optional<double> kappa;
  Eigen::VectorXd weights;  // positive, sums to 1, oldest year first
  double power = 1.0;

  Eigen::Index size() const { return weights.size(); }
  void validate() const;
};

WeightScheme uniform_weights(Eigen::Index T, double power = 1.0);

// w_t = kappa (1 - kappa)^(T - t) / (1 - (1 - kappa)^T), t = 1..T.
WeightScheme geometric_weights(double kappa, Eigen::Index T, double power = 1.0);

struct FpcaFit {
  Eigen::VectorXd mean_fn;         // J
  Eigen::MatrixXd eigenfunctions;  // N x J, rows orthonormal
  Eigen::VectorXd eigenvalues;     // N, non-increasing
  Eigen::MatrixXd scores;          // T x N
  Eigen::VectorXd var_explained;   // N, fraction of total variance
  double total_variance = 0.0;     // trace of the scaled covariance
  Eigen::VectorXd all_eigenvalues; // every retained-as-nonzero eigenvalue, before truncation

  Eigen::Index num_components() const { return eigenvalues.size(); }
  Eigen::Index num_years() const { return scores.rows(); }
};

/// Functional PCA on a T x J matrix of curves sampled on a unit-spaced grid.
///
/// The mean is the weighted average of the curves. Centred rows are scaled by
/// (T w_t)^power and the eigenpairs are those of S'S / (T - 1) for the scaled
/// matrix S, so uniform weights give the ordinary sample covariance. Scores
/// are projections of the unscaled centred curves. Each eigenfunction is
/// signed so that its entry of largest magnitude is positive.
///
/// Throws InsufficientYears when T < 2. Curves with no variance yield N = 0.
FpcaFit fit_ufpca(const Eigen::MatrixXd& curves, const WeightScheme& weights,
                  const ComponentRule& rule);

/// mean_fn + sum_n scores(t, n) * eigenfunction_n.
Eigen::VectorXd reconstruct(const FpcaFit& fit, Eigen::Index t);

/// Same expansion for arbitrary score vectors (one row per curve).
Eigen::MatrixXd expand(const FpcaFit& fit, const Eigen::MatrixXd& scores);

/// Flips the sign of `v` so that its largest-magnitude entry (lowest index on
/// ties) is positive.
void apply_sign_convention(Eigen::Ref<Eigen::VectorXd> v);

}  // namespace mfpca
