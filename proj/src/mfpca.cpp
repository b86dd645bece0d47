#include "mfpca/mfpca.hpp"

#include <algorithm>
#include <numeric>

#include "mfpca/error.hpp"

namespace mfpca {

namespace {

constexpr const char* kModule = "mfpca";
constexpr double kRelativeEigenFloor = 1e-12;
// Applied to singular values of the scaled scores, so heavily down-weighted
// years keep their directions.
constexpr double kRelativeSingularFloor = 1e-10;

JointEigen finish(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors, Eigen::Index keep,
                  double trace, const ComponentRule& rule) {
  JointEigen out;
  const int m = select_ncomp(values.head(keep), rule);
  out.values = values.head(m);
  out.vectors.resize(m, vectors.rows());
  for (int n = 0; n < m; ++n) {
    Eigen::VectorXd c = vectors.col(n);
    apply_sign_convention(c);
    out.vectors.row(n) = c.transpose();
  }
  out.var_explained = trace > 0.0 ? Eigen::VectorXd(out.values / trace) : Eigen::VectorXd::Zero(m);
  return out;
}

// Eigenpairs of scaled' scaled / denom via the SVD of `scaled`.
JointEigen joint_eigen_scaled(const Eigen::MatrixXd& scaled, double denom, const ComponentRule& rule) {
  const Eigen::Index d = scaled.cols();
  if (d == 0 || scaled.rows() == 0) {
    JointEigen out;
    out.values.resize(0);
    out.vectors.resize(0, d);
    out.var_explained.resize(0);
    return out;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  Eigen::Index keep = 0;
  while (keep < sv.size() && sv(keep) > kRelativeSingularFloor * sv(0)) ++keep;
  return finish(sv.array().square() / denom, svd.matrixV(), keep, scaled.squaredNorm() / denom, rule);
}

}  // namespace

JointEigen joint_eigen(const Eigen::MatrixXd& covariance, const ComponentRule& rule) {
  const Eigen::Index d = covariance.rows();
  JointEigen out;
  if (d == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    out.var_explained.resize(0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, kModule, "joint eigenanalysis failed");
  }
  // Eigen returns ascending order.
  Eigen::VectorXd values = solver.eigenvalues().reverse();
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  const double lead = std::max(values(0), 0.0);
  Eigen::Index keep = 0;
  while (keep < d && values(keep) > kRelativeEigenFloor * lead && values(keep) > 0.0) ++keep;

  return finish(values, vectors, keep, covariance.trace(), rule);
}

MfpcaFit fit_mfpca(const std::vector<Eigen::MatrixXd>& curves, const WeightScheme& weights,
                   const ComponentRule& rule) {
  if (curves.empty()) throw Error(ErrorCode::EmptyBundle, kModule, "no populations");
  const Eigen::Index T = curves.front().rows();
  const Eigen::Index J = curves.front().cols();
  for (const auto& c : curves) {
    if (c.rows() != T || c.cols() != J) {
      throw Error(ErrorCode::ShapeMismatch, kModule, "populations are not aligned");
    }
  }

  MfpcaFit fit;
  Eigen::Index width = 0;
  for (const auto& c : curves) {
    fit.per_pop_fits.push_back(fit_ufpca(c, weights, rule));
    fit.block_offsets.push_back(width);
    width += fit.per_pop_fits.back().num_components();
  }

  Eigen::MatrixXd xi(T, width);
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& pf = fit.per_pop_fits[i];
    xi.middleCols(fit.block_offsets[i], pf.num_components()) = pf.scores;
  }
  const Eigen::VectorXd scale =
      (weights.weights.array() * static_cast<double>(T)).pow(weights.power).matrix();
  const Eigen::MatrixXd scaled = scale.asDiagonal() * xi;
  fit.joint_covariance = scaled.transpose() * scaled / static_cast<double>(T - 1);

  JointEigen eig = joint_eigen_scaled(scaled, static_cast<double>(T - 1), rule);
  fit.joint_eigenvalues = std::move(eig.values);
  fit.block_eigenvectors = std::move(eig.vectors);
  fit.var_explained = std::move(eig.var_explained);

  const Eigen::Index M = fit.joint_eigenvalues.size();
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& pf = fit.per_pop_fits[i];
    const Eigen::MatrixXd block =
        fit.block_eigenvectors.middleCols(fit.block_offsets[i], pf.num_components());
    fit.multi_eigenfunctions.push_back(M > 0 && pf.num_components() > 0
                                           ? Eigen::MatrixXd(block * pf.eigenfunctions)
                                           : Eigen::MatrixXd::Zero(M, J));
  }
  fit.shared_scores = xi * fit.block_eigenvectors.transpose();
  return fit;
}

MfpcaFit fit_mfpca(const SurfaceBundle& bundle, const WeightScheme& weights,
                   const ComponentRule& rule) {
  if (bundle.empty()) throw Error(ErrorCode::EmptyBundle, kModule, "bundle has no surfaces");
  validate_bundle(bundle);
  std::vector<Eigen::MatrixXd> curves;
  curves.reserve(bundle.size());
  for (const auto& s : bundle.surfaces) curves.push_back(s.log_rates);
  return fit_mfpca(curves, weights, rule);
}

Eigen::VectorXd reconstruct_mfpca(const MfpcaFit& fit, std::size_t population, Eigen::Index t) {
  if (population >= fit.num_populations()) {
    throw Error(ErrorCode::IndexOutOfRange, kModule, "population index " + std::to_string(population));
  }
  if (t < 0 || t >= fit.shared_scores.rows()) {
    throw Error(ErrorCode::IndexOutOfRange, kModule, "year index " + std::to_string(t));
  }
  return fit.per_pop_fits[population].mean_fn +
         fit.multi_eigenfunctions[population].transpose() * fit.shared_scores.row(t).transpose();
}

Eigen::MatrixXd expand_mfpca(const MfpcaFit& fit, std::size_t population,
                             const Eigen::MatrixXd& shared_scores) {
  if (population >= fit.num_populations()) {
    throw Error(ErrorCode::IndexOutOfRange, kModule, "population index " + std::to_string(population));
  }
  if (shared_scores.cols() != fit.num_components()) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "score width differs from component count");
  }
  return (shared_scores * fit.multi_eigenfunctions[population]).rowwise() +
         fit.per_pop_fits[population].mean_fn.transpose();
}

}  // namespace mfpca
