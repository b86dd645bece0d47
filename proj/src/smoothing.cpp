#include "mfpca/smoothing.hpp"

#include <cmath>

#include "mfpca/error.hpp"

namespace mfpca {

namespace {

constexpr const char* kModule = "smoothing";

// Cox-de Boor recursion for all cubic basis functions at x.
Eigen::RowVectorXd cubic_basis_row(double x, const std::vector<double>& knots, Eigen::Index count) {
  const int n_knots = static_cast<int>(knots.size());
  std::vector<double> b(static_cast<std::size_t>(n_knots - 1), 0.0);
  for (int i = 0; i + 1 < n_knots; ++i) {
    if (knots[i] <= x && x < knots[i + 1]) b[static_cast<std::size_t>(i)] = 1.0;
  }
  for (int k = 1; k <= 3; ++k) {
    for (int i = 0; i + k + 1 < n_knots; ++i) {
      const double left_den = knots[i + k] - knots[i];
      const double right_den = knots[i + k + 1] - knots[i + 1];
      double v = 0.0;
      if (left_den > 0) v += (x - knots[i]) / left_den * b[static_cast<std::size_t>(i)];
      if (right_den > 0) v += (knots[i + k + 1] - x) / right_den * b[static_cast<std::size_t>(i + 1)];
      b[static_cast<std::size_t>(i)] = v;
    }
  }
  Eigen::RowVectorXd out(count);
  for (Eigen::Index i = 0; i < count; ++i) out(i) = b[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace

std::vector<double> SmoothConfig::default_lambda_grid() {
  std::vector<double> grid(20);
  for (int i = 0; i < 20; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, -4.0 + 8.0 * i / 19.0);
  return grid;
}

void SmoothConfig::validate() const {
  if (penalty_order < 1 || basis_dim < penalty_order + 1 || basis_dim < 4) {
    throw Error(ErrorCode::InvalidArgument, kModule,
                "basis_dim must be >= max(4, penalty_order + 1)");
  }
  if (lambda_grid.empty()) throw Error(ErrorCode::InvalidArgument, kModule, "empty lambda grid");
  for (double l : lambda_grid) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw Error(ErrorCode::InvalidArgument, kModule, "lambda values must be positive");
    }
  }
  if (monotone_from_age < 0 || monotone_from_age > 100) {
    throw Error(ErrorCode::InvalidArgument, kModule, "monotone_from_age must lie in 0..100");
  }
}

Eigen::MatrixXd bspline_basis(const Eigen::VectorXd& x, int basis_dim) {
  const double lo = x.minCoeff();
  const double hi = x.maxCoeff();
  const int intervals = basis_dim - 3;
  const double dx = (hi - lo) / intervals;
  std::vector<double> knots(static_cast<std::size_t>(basis_dim + 4));
  for (std::size_t i = 0; i < knots.size(); ++i) {
    knots[i] = lo + (static_cast<double>(i) - 3.0) * dx;
  }
  Eigen::MatrixXd B(x.size(), basis_dim);
  for (Eigen::Index r = 0; r < x.size(); ++r) {
    // Half-open spans: nudge the right endpoint into the last interior span.
    const double xr = x(r) >= hi ? hi - 1e-10 * dx : x(r);
    B.row(r) = cubic_basis_row(xr, knots, basis_dim);
  }
  return B;
}

Eigen::MatrixXd difference_matrix(int basis_dim, int order) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Identity(basis_dim, basis_dim);
  for (int k = 0; k < order; ++k) {
    D = (D.bottomRows(D.rows() - 1) - D.topRows(D.rows() - 1)).eval();
  }
  return D;
}

PenalizedSplineFit fit_penalized_spline(const Eigen::VectorXd& y, const SmoothConfig& config) {
  config.validate();
  if (!y.allFinite()) throw Error(ErrorCode::NonFiniteInput, kModule, "curve has non-finite values");
  const Eigen::Index J = y.size();
  if (J < config.basis_dim) {
    throw Error(ErrorCode::InvalidArgument, kModule,
                "curve length " + std::to_string(J) + " is below basis_dim");
  }

  PenalizedSplineFit fit;
  fit.basis = bspline_basis(Eigen::VectorXd::LinSpaced(J, 0.0, static_cast<double>(J - 1)),
                            config.basis_dim);
  const Eigen::MatrixXd D = difference_matrix(config.basis_dim, config.penalty_order);
  fit.penalty = D.transpose() * D;
  const Eigen::MatrixXd BtB = fit.basis.transpose() * fit.basis;
  const Eigen::VectorXd Bty = fit.basis.transpose() * y;

  bool have_fit = false;
  for (double lambda : config.lambda_grid) {
    Eigen::LLT<Eigen::MatrixXd> llt(BtB + lambda * fit.penalty);
    if (llt.info() != Eigen::Success) continue;
    Eigen::VectorXd a = llt.solve(Bty);
    Eigen::VectorXd f = fit.basis * a;
    const double rss = (y - f).squaredNorm();
    const double edf = llt.solve(BtB).trace();
    const double denom = static_cast<double>(J) - edf;
    if (!(denom > 0.0)) continue;
    const double gcv = static_cast<double>(J) * rss / (denom * denom);
    // Strict comparison keeps the smallest lambda among exact ties.
    if (!have_fit || gcv < fit.gcv) {
      fit.coefficients = std::move(a);
      fit.fitted = std::move(f);
      fit.lambda = lambda;
      fit.edf = edf;
      fit.gcv = gcv;
      have_fit = true;
    }
  }
  if (!have_fit) {
    throw Error(ErrorCode::SingularSystem, kModule, "penalized normal equations are singular");
  }
  return fit;
}

Eigen::VectorXd isotonic_increasing(const Eigen::VectorXd& y) {
  struct Block {
    double sum;
    double count;
    double mean() const { return sum / count; }
  };
  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    blocks.push_back({y(i), 1.0});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      Block last = blocks.back();
      blocks.pop_back();
      blocks.back().sum += last.sum;
      blocks.back().count += last.count;
    }
  }
  Eigen::VectorXd out(y.size());
  Eigen::Index pos = 0;
  for (const auto& b : blocks) {
    const double m = b.mean();
    for (int k = 0; k < static_cast<int>(b.count); ++k) out(pos++) = m;
  }
  return out;
}

Eigen::VectorXd smooth_curve(const Eigen::VectorXd& log_rates_row, const std::vector<int>& ages,
                             const SmoothConfig& config) {
  if (static_cast<Eigen::Index>(ages.size()) != log_rates_row.size()) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "ages and curve differ in length");
  }
  Eigen::VectorXd fitted = fit_penalized_spline(log_rates_row, config).fitted;
  Eigen::Index start = 0;
  while (start < fitted.size() && ages[static_cast<std::size_t>(start)] < config.monotone_from_age) ++start;
  if (fitted.size() - start >= 2) {
    fitted.tail(fitted.size() - start) = isotonic_increasing(fitted.tail(fitted.size() - start));
  }
  return fitted;
}

Eigen::VectorXd residual_rms(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() == 0) return Eigen::VectorXd::Zero(sigma.cols());
  return (sigma.array().square().colwise().sum() / static_cast<double>(sigma.rows()))
      .sqrt()
      .transpose();
}

SmoothedSurface smooth_surface(const MortalitySurface& surface, const SmoothConfig& config) {
  if (surface.kind != SurfaceKind::Observed) {
    throw Error(ErrorCode::InvalidArgument, kModule,
                "surface " + surface.population_id + " is already smoothed");
  }
  validate_surface(surface);
  SmoothedSurface out;
  out.surface = surface;
  out.surface.kind = SurfaceKind::Smoothed;
  for (Eigen::Index t = 0; t < surface.log_rates.rows(); ++t) {
    out.surface.log_rates.row(t) =
        smooth_curve(surface.log_rates.row(t).transpose(), surface.ages, config).transpose();
  }
  out.residuals.sigma = (surface.log_rates - out.surface.log_rates).cwiseAbs();
  out.residuals.sigma_avg = residual_rms(out.residuals.sigma);
  return out;
}

SmoothedBundle SmoothedBundle::slice_years(int first, int last) const {
  SmoothedBundle out;
  out.surfaces = surfaces.slice_years(first, last);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const auto& src = surfaces.surfaces[i];
    const Eigen::Index i0 = src.year_index(first);
    const Eigen::Index i1 = src.year_index(last);
    ResidualField r;
    r.sigma = residuals[i].sigma.middleRows(i0, i1 - i0 + 1);
    r.sigma_avg = residual_rms(r.sigma);
    out.residuals.push_back(std::move(r));
  }
  return out;
}

SmoothedBundle smooth_bundle(const SurfaceBundle& observed, const SmoothConfig& config) {
  validate_bundle(observed);
  SmoothedBundle out;
  for (const auto& s : observed.surfaces) {
    SmoothedSurface sm = smooth_surface(s, config);
    out.surfaces.surfaces.push_back(std::move(sm.surface));
    out.residuals.push_back(std::move(sm.residuals));
  }
  return out;
}

}  // namespace mfpca
