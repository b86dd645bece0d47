#include "mfpca/forecasters.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "mfpca/error.hpp"

namespace mfpca {

namespace {

constexpr const char* kModule = "forecasters";

std::vector<Eigen::MatrixXd> curves_of(const SurfaceBundle& bundle) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(bundle.size());
  for (const auto& s : bundle.surfaces) out.push_back(s.log_rates);
  return out;
}

FittedModel skeleton(ModelKind kind, const SurfaceBundle& bundle, WeightScheme weights) {
  validate_bundle(bundle);
  FittedModel m;
  m.kind = kind;
  for (const auto& s : bundle.surfaces) m.population_ids.push_back(s.population_id);
  m.ages = bundle.ages();
  m.years = bundle.years();
  m.weights = std::move(weights);
  return m;
}

WeightScheme weights_for(const ModelConfig& config, Eigen::Index T, double kappa) {
  return geometric_weights(kappa, T, config.weight_power);
}

ArimaFitOptions arima_options(const ModelConfig& config, SeriesMode mode) {
  ArimaFitOptions o = config.arima;
  o.mode = mode;
  // Deviation and ratio scores are centred by construction and modelled as
  // zero-mean stationary processes.
  o.allow_constant = mode == SeriesMode::Nonstationary;
  return o;
}

void add_component(FittedModel& m, std::string label, Eigen::VectorXd scores,
                   std::vector<Eigen::VectorXd> basis, SeriesMode mode, const ModelConfig& config) {
  ComponentSeries c;
  c.label = std::move(label);
  c.scores = std::move(scores);
  c.basis = std::move(basis);
  c.mode = mode;
  c.spec = fit_auto(c.scores, arima_options(config, mode));
  m.components.push_back(std::move(c));
}

// Basis that is `fn` in population `pop` and zero elsewhere.
std::vector<Eigen::VectorXd> single_pop_basis(std::size_t p, std::size_t pop, const Eigen::VectorXd& fn) {
  std::vector<Eigen::VectorXd> basis(p, Eigen::VectorXd::Zero(fn.size()));
  basis[pop] = fn;
  return basis;
}

std::vector<Eigen::VectorXd> shared_basis(std::size_t p, const Eigen::VectorXd& fn) {
  return std::vector<Eigen::VectorXd>(p, fn);
}

void require_kappa(double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw Error(ErrorCode::KappaOutOfRange, kModule, "kappa must lie in (0, 1)");
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Independent: return "independent";
    case ModelKind::Wmfpca: return "wmfpca";
    case ModelKind::Coherent: return "coherent";
    case ModelKind::ProductRatio: return "product_ratio";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "independent") return ModelKind::Independent;
  if (name == "wmfpca") return ModelKind::Wmfpca;
  if (name == "coherent") return ModelKind::Coherent;
  if (name == "product_ratio") return ModelKind::ProductRatio;
  throw Error(ErrorCode::ConfigError, kModule, "unknown model '" + std::string(name) + "'");
}

FittedModel fit_independent(const SurfaceBundle& bundle, const ModelConfig& config) {
  if (bundle.empty()) throw Error(ErrorCode::EmptyBundle, kModule, "bundle has no surfaces");
  const Eigen::Index T = static_cast<Eigen::Index>(bundle.years().size());
  WeightScheme w = config.weight_independent && config.kappa
                       ? weights_for(config, T, *config.kappa)
                       : uniform_weights(T, config.weight_power);
  FittedModel m = skeleton(ModelKind::Independent, bundle, w);
  const std::size_t p = bundle.size();
  for (std::size_t i = 0; i < p; ++i) {
    FpcaFit fit = fit_ufpca(bundle.surfaces[i].log_rates, m.weights, config.rule);
    m.base.push_back(fit.mean_fn);
    for (Eigen::Index n = 0; n < fit.num_components(); ++n) {
      add_component(m, m.population_ids[i] + ":pc" + std::to_string(n + 1), fit.scores.col(n),
                    single_pop_basis(p, i, fit.eigenfunctions.row(n).transpose()),
                    SeriesMode::Nonstationary, config);
    }
    m.independent_fits.push_back(std::move(fit));
  }
  return m;
}

FittedModel fit_wmfpca(const SurfaceBundle& bundle, double kappa, const ModelConfig& config) {
  require_kappa(kappa);
  if (bundle.empty()) throw Error(ErrorCode::EmptyBundle, kModule, "bundle has no surfaces");
  const Eigen::Index T = static_cast<Eigen::Index>(bundle.years().size());
  FittedModel m = skeleton(ModelKind::Wmfpca, bundle, weights_for(config, T, kappa));
  MfpcaFit fit = fit_mfpca(curves_of(bundle), m.weights, config.rule);
  const std::size_t p = bundle.size();
  for (std::size_t i = 0; i < p; ++i) m.base.push_back(fit.per_pop_fits[i].mean_fn);
  for (Eigen::Index n = 0; n < fit.num_components(); ++n) {
    std::vector<Eigen::VectorXd> basis;
    for (std::size_t i = 0; i < p; ++i) basis.push_back(fit.multi_eigenfunctions[i].row(n).transpose());
    add_component(m, "mpc" + std::to_string(n + 1), fit.shared_scores.col(n), std::move(basis),
                  SeriesMode::Nonstationary, config);
  }
  m.mfpca_fit = std::move(fit);
  return m;
}

FittedModel fit_coherent(const SurfaceBundle& bundle, double kappa, const ModelConfig& config) {
  require_kappa(kappa);
  if (bundle.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, kModule, "the coherent model needs at least 2 populations");
  }
  const Eigen::Index T = static_cast<Eigen::Index>(bundle.years().size());
  FittedModel m = skeleton(ModelKind::Coherent, bundle, weights_for(config, T, kappa));
  const std::size_t p = bundle.size();

  // Steps 1-3: averaged curves, weighted mean, common-trend FPCA.
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(bundle.surfaces[0].log_rates.rows(),
                                                bundle.surfaces[0].log_rates.cols());
  for (const auto& s : bundle.surfaces) total += s.log_rates;
  total /= static_cast<double>(p);

  CoherentFit cf;
  cf.common_fit = fit_ufpca(total, m.weights, config.rule);
  cf.total_mean = cf.common_fit.mean_fn;
  const Eigen::MatrixXd total_fitted = expand(cf.common_fit, cf.common_fit.scores);

  // Steps 4-6: deviations from the fitted total, weighted means, MFPCA.
  std::vector<Eigen::MatrixXd> deviations;
  for (const auto& s : bundle.surfaces) deviations.push_back(s.log_rates - total_fitted);
  cf.deviation_fit = fit_mfpca(deviations, m.weights, config.rule);
  for (std::size_t i = 0; i < p; ++i) {
    cf.deviation_means.push_back(cf.deviation_fit.per_pop_fits[i].mean_fn);
    m.base.push_back(cf.total_mean + cf.deviation_means.back());
  }

  for (Eigen::Index k = 0; k < cf.common_fit.num_components(); ++k) {
    add_component(m, "common" + std::to_string(k + 1), cf.common_fit.scores.col(k),
                  shared_basis(p, cf.common_fit.eigenfunctions.row(k).transpose()),
                  SeriesMode::Nonstationary, config);
  }
  for (Eigen::Index l = 0; l < cf.deviation_fit.num_components(); ++l) {
    std::vector<Eigen::VectorXd> basis;
    for (std::size_t i = 0; i < p; ++i) {
      basis.push_back(cf.deviation_fit.multi_eigenfunctions[i].row(l).transpose());
    }
    add_component(m, "deviation" + std::to_string(l + 1), cf.deviation_fit.shared_scores.col(l),
                  std::move(basis), SeriesMode::Stationary, config);
  }
  m.coherent_fit = std::move(cf);
  return m;
}

FittedModel fit_product_ratio(const SurfaceBundle& bundle, const ModelConfig& config) {
  if (bundle.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, kModule, "the product-ratio model needs at least 2 populations");
  }
  const Eigen::Index T = static_cast<Eigen::Index>(bundle.years().size());
  FittedModel m = skeleton(ModelKind::ProductRatio, bundle, uniform_weights(T, config.weight_power));
  const std::size_t p = bundle.size();

  Eigen::MatrixXd product = Eigen::MatrixXd::Zero(bundle.surfaces[0].log_rates.rows(),
                                                  bundle.surfaces[0].log_rates.cols());
  for (const auto& s : bundle.surfaces) product += s.log_rates;
  product /= static_cast<double>(p);

  ProductRatioFit pr;
  pr.product_fit = fit_ufpca(product, m.weights, config.rule);
  for (std::size_t i = 0; i < p; ++i) {
    pr.ratio_fits.push_back(fit_ufpca(bundle.surfaces[i].log_rates - product, m.weights, config.rule));
    m.base.push_back(pr.product_fit.mean_fn + pr.ratio_fits.back().mean_fn);
  }
  for (Eigen::Index k = 0; k < pr.product_fit.num_components(); ++k) {
    add_component(m, "product" + std::to_string(k + 1), pr.product_fit.scores.col(k),
                  shared_basis(p, pr.product_fit.eigenfunctions.row(k).transpose()),
                  SeriesMode::Nonstationary, config);
  }
  for (std::size_t i = 0; i < p; ++i) {
    const FpcaFit& rf = pr.ratio_fits[i];
    for (Eigen::Index k = 0; k < rf.num_components(); ++k) {
      add_component(m, m.population_ids[i] + ":ratio" + std::to_string(k + 1), rf.scores.col(k),
                    single_pop_basis(p, i, rf.eigenfunctions.row(k).transpose()),
                    SeriesMode::Stationary, config);
    }
  }
  m.product_ratio_fit = std::move(pr);
  return m;
}

FittedModel fit_model(ModelKind kind, const SurfaceBundle& bundle, const ModelConfig& config) {
  auto need_kappa = [&]() {
    if (!config.kappa) {
      throw Error(ErrorCode::ConfigError, kModule,
                  std::string(to_string(kind)) + " requires kappa");
    }
    return *config.kappa;
  };
  switch (kind) {
    case ModelKind::Independent: return fit_independent(bundle, config);
    case ModelKind::Wmfpca: return fit_wmfpca(bundle, need_kappa(), config);
    case ModelKind::Coherent: return fit_coherent(bundle, need_kappa(), config);
    case ModelKind::ProductRatio: return fit_product_ratio(bundle, config);
  }
  throw Error(ErrorCode::ConfigError, kModule, "unknown model");
}

Eigen::MatrixXd fitted_values(const FittedModel& model, std::size_t population) {
  if (population >= model.num_populations()) {
    throw Error(ErrorCode::IndexOutOfRange, kModule, "population index " + std::to_string(population));
  }
  const Eigen::Index T = static_cast<Eigen::Index>(model.years.size());
  Eigen::MatrixXd out = model.base[population].transpose().replicate(T, 1);
  for (const auto& c : model.components) out += c.scores * c.basis[population].transpose();
  return out;
}

ScoreForecasts forecast_scores(const FittedModel& model, int h) {
  ScoreForecasts out;
  out.per_component.reserve(model.components.size());
  for (const auto& c : model.components) out.per_component.push_back(forecast(c.spec, c.scores, h));
  return out;
}

double normal_quantile_upper(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::AlphaOutOfRange, kModule, "alpha must lie in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - alpha / 2.0);
}

ForecastSurface predict_interval(std::string population_id, std::vector<int> ages,
                                 std::vector<int> horizon_years, Eigen::MatrixXd mean,
                                 Eigen::MatrixXd variance, double alpha) {
  const double z = normal_quantile_upper(alpha);
  if (mean.rows() != variance.rows() || mean.cols() != variance.cols()) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "mean and variance differ in shape");
  }
  ForecastSurface f;
  f.population_id = std::move(population_id);
  f.ages = std::move(ages);
  f.horizon_years = std::move(horizon_years);
  f.alpha = alpha;
  f.variance = variance.cwiseMax(0.0);
  const Eigen::MatrixXd half = z * f.variance.cwiseSqrt();
  f.lower = mean - half;
  f.upper = mean + half;
  f.mean = std::move(mean);
  return f;
}

Eigen::VectorXd mean_estimation_variance(const WeightScheme& weights, const ResidualField& residuals) {
  if (residuals.sigma.rows() != weights.size()) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "residual field does not cover the training years");
  }
  const Eigen::VectorXd w2 = weights.weights.array().square();
  return residuals.sigma.array().square().matrix().transpose() * w2;
}

std::vector<ForecastSurface> forecast_model(const FittedModel& model, int h,
                                            const std::vector<ResidualField>& residuals,
                                            double alpha) {
  return forecast_model(model, h, residuals, alpha, forecast_scores(model, h));
}

std::vector<ForecastSurface> forecast_model(const FittedModel& model, int h,
                                            const std::vector<ResidualField>& residuals,
                                            double alpha, const ScoreForecasts& scores) {
  if (h < 1) throw Error(ErrorCode::InvalidArgument, kModule, "horizon must be >= 1");
  normal_quantile_upper(alpha);
  if (!residuals.empty() && residuals.size() != model.num_populations()) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "need one residual field per population");
  }
  if (scores.per_component.size() != model.components.size()) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "score forecasts do not match the components");
  }
  const Eigen::Index J = static_cast<Eigen::Index>(model.ages.size());
  std::vector<int> horizon_years;
  for (int k = 1; k <= h; ++k) horizon_years.push_back(model.years.back() + k);

  std::vector<ForecastSurface> out;
  for (std::size_t i = 0; i < model.num_populations(); ++i) {
    Eigen::MatrixXd mean = model.base[i].transpose().replicate(h, 1);
    Eigen::MatrixXd variance = Eigen::MatrixXd::Zero(h, J);
    for (std::size_t c = 0; c < model.components.size(); ++c) {
      const Eigen::VectorXd& fn = model.components[c].basis[i];
      const auto& sf = scores.per_component[c];
      if (sf.mean.size() < h) throw Error(ErrorCode::ShapeMismatch, kModule, "short score forecast");
      mean += sf.mean.head(h) * fn.transpose();
      variance += sf.variance.head(h) * fn.array().square().matrix().transpose();
    }
    if (!residuals.empty()) {
      const Eigen::VectorXd fixed = mean_estimation_variance(model.weights, residuals[i]) +
                                    Eigen::VectorXd(residuals[i].sigma_avg.array().square());
      variance.rowwise() += fixed.transpose();
    }
    out.push_back(predict_interval(model.population_ids[i], model.ages, horizon_years,
                                   std::move(mean), std::move(variance), alpha));
  }
  return out;
}

}  // namespace mfpca
