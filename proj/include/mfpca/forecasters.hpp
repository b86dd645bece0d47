#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mfpca/arima.hpp"
#include "mfpca/component_rule.hpp"
#include "mfpca/mfpca.hpp"
#include "mfpca/smoothing.hpp"
#include "mfpca/surface.hpp"
#include "mfpca/ufpca.hpp"

namespace mfpca {

enum class ModelKind { Independent, Wmfpca, Coherent, ProductRatio };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

inline constexpr double kDefaultAlpha = 0.05;

struct ModelConfig {
  ComponentRule rule;
  // Geometric weight parameter. Required by wmfpca and coherent; the
  // independent model uses it only when `weight_independent` is set.
  std::optional<double> kappa;
  bool weight_independent = false;
  double weight_power = 1.0;
  ArimaFitOptions arima;  // mode and allow_constant are set per component
};

// Per-age forecast mean, total variance and interval bounds on the log scale.
struct ForecastSurface {
  std::string population_id;
  std::vector<int> ages;
  std::vector<int> horizon_years;
  Eigen::MatrixXd mean;      // h x J
  Eigen::MatrixXd variance;  // h x J
  Eigen::MatrixXd lower;
  Eigen::MatrixXd upper;
  double alpha = kDefaultAlpha;
};

// One extrapolated score series and the age functions it multiplies in each
// population (zero vectors where it does not contribute).
struct ComponentSeries {
  std::string label;
  Eigen::VectorXd scores;             // T
  std::vector<Eigen::VectorXd> basis; // per population, J
  SeriesMode mode = SeriesMode::Nonstationary;
  ArimaSpec spec;
};

struct CoherentFit {
  Eigen::VectorXd total_mean;                 // mu(x)
  FpcaFit common_fit;                         // over the averaged curves
  std::vector<Eigen::VectorXd> deviation_means;  // eta^(i)(x)
  MfpcaFit deviation_fit;                     // over the demeaned deviations
};

struct ProductRatioFit {
  FpcaFit product_fit;
  std::vector<FpcaFit> ratio_fits;
};

/// A fitted forecaster in the common form
///   Y^(i)_{T+h}(x) = base^(i)(x) + sum_c score_c(T+h) basis_c^(i)(x),
/// with the model-specific decomposition kept alongside for inspection.
struct FittedModel {
  ModelKind kind = ModelKind::Independent;
  std::vector<std::string> population_ids;
  std::vector<int> ages;
  std::vector<int> years;
  WeightScheme weights;
  std::vector<Eigen::VectorXd> base;  // per population
  std::vector<ComponentSeries> components;

  std::vector<FpcaFit> independent_fits;
  std::optional<MfpcaFit> mfpca_fit;
  std::optional<CoherentFit> coherent_fit;
  std::optional<ProductRatioFit> product_ratio_fit;

  std::size_t num_populations() const { return population_ids.size(); }
};

FittedModel fit_independent(const SurfaceBundle& bundle, const ModelConfig& config);
FittedModel fit_wmfpca(const SurfaceBundle& bundle, double kappa, const ModelConfig& config);
FittedModel fit_coherent(const SurfaceBundle& bundle, double kappa, const ModelConfig& config);
FittedModel fit_product_ratio(const SurfaceBundle& bundle, const ModelConfig& config);

// Dispatches on `kind`; wmfpca and coherent require config.kappa.
FittedModel fit_model(ModelKind kind, const SurfaceBundle& bundle, const ModelConfig& config);

/// In-sample T x J reconstruction of one population.
Eigen::MatrixXd fitted_values(const FittedModel& model, std::size_t population);

struct ScoreForecasts {
  std::vector<ScoreForecast> per_component;
};

/// Point forecasts of every component series for horizons 1..h.
ScoreForecasts forecast_scores(const FittedModel& model, int h);

/// Upper (1 - alpha/2) standard normal quantile. Throws AlphaOutOfRange.
double normal_quantile_upper(double alpha);

/// mean +/- z sqrt(variance).
ForecastSurface predict_interval(std::string population_id, std::vector<int> ages,
                                 std::vector<int> horizon_years, Eigen::MatrixXd mean,
                                 Eigen::MatrixXd variance, double alpha = kDefaultAlpha);

/// Mean-function estimation variance sum_t w_t^2 sigma_t(x)^2.
Eigen::VectorXd mean_estimation_variance(const WeightScheme& weights, const ResidualField& residuals);

/// h-step forecasts with prediction intervals. The variance adds the
/// mean-estimation term, the score forecast variances times squared basis
/// functions and sigma_avg^2. `residuals` may be empty (noise terms omitted);
/// otherwise it holds one field per population over the training years.
std::vector<ForecastSurface> forecast_model(const FittedModel& model, int h,
                                            const std::vector<ResidualField>& residuals = {},
                                            double alpha = kDefaultAlpha);

std::vector<ForecastSurface> forecast_model(const FittedModel& model, int h,
                                            const std::vector<ResidualField>& residuals,
                                            double alpha, const ScoreForecasts& scores);

}  // namespace mfpca
