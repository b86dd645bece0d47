#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mfpca/surface.hpp"
#include "mfpca/ufpca.hpp"

namespace mfpca {

struct MfpcaFit {
  std::vector<FpcaFit> per_pop_fits;
  std::vector<Eigen::Index> block_offsets;        // start column of each population block
  Eigen::MatrixXd joint_covariance;                // sum N_i square, scaled score covariance
  Eigen::VectorXd joint_eigenvalues;               // M, non-increasing
  Eigen::MatrixXd block_eigenvectors;              // M x sum N_i, rows orthonormal
  std::vector<Eigen::MatrixXd> multi_eigenfunctions;  // per population, M x J
  Eigen::MatrixXd shared_scores;                   // T x M
  Eigen::VectorXd var_explained;                   // M, share of trace(joint_covariance)

  std::size_t num_populations() const { return per_pop_fits.size(); }
  Eigen::Index num_components() const { return joint_eigenvalues.size(); }
};

// Eigenpairs of a symmetric matrix, sorted non-increasing, numerically zero
// eigenvalues dropped, sign convention applied to each eigenvector, then
// truncated by `rule`. Eigenvectors are returned as rows.
struct JointEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd var_explained;
};
JointEigen joint_eigen(const Eigen::MatrixXd& covariance, const ComponentRule& rule);

/// Multivariate FPCA on aligned curve sets via the covariance of stacked
/// univariate scores:
///   1. univariate FPCA per population with shared weights and rule;
///   2. stack the scores into Xi (T x sum N_i) and form
///      Z = (S Xi)'(S Xi) / (T - 1), S = diag((T w_t)^power);
///   3. eigenanalysis of Z;
///   4. psi_n^(i) = sum_m c_nm^(i) phi_m^(i), rho_tn = sum_i sum_m c_nm^(i) beta_tm^(i).
MfpcaFit fit_mfpca(const std::vector<Eigen::MatrixXd>& curves, const WeightScheme& weights,
                   const ComponentRule& rule);

MfpcaFit fit_mfpca(const SurfaceBundle& bundle, const WeightScheme& weights,
                   const ComponentRule& rule);

/// mu^(i) + sum_n rho_tn psi_n^(i).
Eigen::VectorXd reconstruct_mfpca(const MfpcaFit& fit, std::size_t population, Eigen::Index t);

/// Expansion of arbitrary shared-score rows for one population.
Eigen::MatrixXd expand_mfpca(const MfpcaFit& fit, std::size_t population,
                             const Eigen::MatrixXd& shared_scores);

}  // namespace mfpca
