#include "mfpca/ufpca.hpp"

#include <cmath>

#include "mfpca/error.hpp"

namespace mfpca {

namespace {

constexpr const char* kModule = "ufpca";

// Eigenvalues below this fraction of the leading one are numerical zeros.
// Relative to the largest singular value of the scaled, centred curves.
constexpr double kRelativeSingularFloor = 1e-10;

}  // namespace

void WeightScheme::validate() const {
  if (weights.size() == 0 || (weights.array() <= 0.0).any() || !weights.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, kModule, "weights must be positive and finite");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, kModule, "weights must sum to 1");
  }
  if (!(power > 0.0)) throw Error(ErrorCode::InvalidArgument, kModule, "weight power must be > 0");
}

WeightScheme uniform_weights(Eigen::Index T, double power) {
  if (T < 1) throw Error(ErrorCode::InvalidArgument, kModule, "T must be >= 1");
  WeightScheme w;
  w.weights = Eigen::VectorXd::Constant(T, 1.0 / static_cast<double>(T));
  w.power = power;
  return w;
}

WeightScheme geometric_weights(double kappa, Eigen::Index T, double power) {
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw Error(ErrorCode::KappaOutOfRange, kModule,
                "kappa must lie in (0, 1), got " + std::to_string(kappa));
  }
  if (T < 1) throw Error(ErrorCode::InvalidArgument, kModule, "T must be >= 1");
  WeightScheme w;
  w.kappa = kappa;
  w.power = power;
  w.weights.resize(T);
  const double log_decay = std::log1p(-kappa);
  // 1 - (1 - kappa)^T without cancellation for tiny kappa.
  const double total = -std::expm1(static_cast<double>(T) * log_decay);
  for (Eigen::Index t = 0; t < T; ++t) {
    w.weights(t) = kappa * std::exp(static_cast<double>(T - 1 - t) * log_decay) / total;
  }
  return w;
}

void apply_sign_convention(Eigen::Ref<Eigen::VectorXd> v) {
  if (v.size() == 0) return;
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  if (v(best) < 0.0) v = -v;
}

FpcaFit fit_ufpca(const Eigen::MatrixXd& curves, const WeightScheme& weights,
                  const ComponentRule& rule) {
  const Eigen::Index T = curves.rows();
  const Eigen::Index J = curves.cols();
  if (T < 2) throw Error(ErrorCode::InsufficientYears, kModule, "need at least 2 curves");
  if (!curves.allFinite()) throw Error(ErrorCode::NonFiniteInput, kModule, "curves not finite");
  if (weights.size() != T) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "weights do not match the number of curves");
  }
  weights.validate();
  rule.validate();

  FpcaFit fit;
  fit.mean_fn = curves.transpose() * weights.weights;
  const Eigen::MatrixXd centred = curves.rowwise() - fit.mean_fn.transpose();
  const Eigen::VectorXd scale =
      (weights.weights.array() * static_cast<double>(T)).pow(weights.power).matrix();
  const Eigen::MatrixXd scaled = scale.asDiagonal() * centred;

  const double denom = static_cast<double>(T - 1);
  fit.total_variance = scaled.squaredNorm() / denom;

  const double magnitude = std::max(1.0, curves.squaredNorm() / static_cast<double>(T * J));
  const bool degenerate = !(fit.total_variance > 1e-20 * static_cast<double>(J) * magnitude);

  Eigen::MatrixXd vectors(J, 0);
  Eigen::VectorXd values(0);
  if (!degenerate) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    Eigen::Index keep = 0;
    while (keep < sv.size() && sv(keep) > kRelativeSingularFloor * sv(0)) ++keep;
    values = sv.head(keep).array().square() / denom;
    vectors = svd.matrixV().leftCols(keep);
  }
  fit.all_eigenvalues = values;

  const int n = select_ncomp(values, rule);
  fit.eigenvalues = values.head(n);
  fit.eigenfunctions.resize(n, J);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd v = vectors.col(k);
    apply_sign_convention(v);
    fit.eigenfunctions.row(k) = v.transpose();
  }
  fit.var_explained = fit.total_variance > 0.0 ? Eigen::VectorXd(fit.eigenvalues / fit.total_variance)
                                               : Eigen::VectorXd::Zero(n);
  fit.scores = centred * fit.eigenfunctions.transpose();
  return fit;
}

Eigen::VectorXd reconstruct(const FpcaFit& fit, Eigen::Index t) {
  if (t < 0 || t >= fit.scores.rows()) {
    throw Error(ErrorCode::IndexOutOfRange, kModule, "year index " + std::to_string(t));
  }
  return fit.mean_fn + fit.eigenfunctions.transpose() * fit.scores.row(t).transpose();
}

Eigen::MatrixXd expand(const FpcaFit& fit, const Eigen::MatrixXd& scores) {
  if (scores.cols() != fit.num_components()) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "score width differs from component count");
  }
  return (scores * fit.eigenfunctions).rowwise() + fit.mean_fn.transpose();
}

}  // namespace mfpca
