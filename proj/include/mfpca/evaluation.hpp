#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfpca/forecasters.hpp"
#include "mfpca/surface.hpp"

namespace mfpca {

inline constexpr int kDefaultWindows = 10;
inline constexpr int kMinTrainingYears = 10;

struct EvalReport {
  std::string country;
  std::string model;
  int h = 0;
  std::vector<std::string> population_ids;
  Eigen::VectorXd rmse;  // per population
  double avg_rmse = 0.0;
  int windows = 0;
  std::optional<double> kappa;
};

/// Point forecast for year `train_end + h` given training data through
/// `train_end`; one vector of length J per population.
using WindowForecaster = std::function<std::vector<Eigen::VectorXd>(int train_end, int h)>;

/// Training-end years of the rolling schedule: the forecast years tile the
/// last `windows` years of `observed`. Throws InsufficientSpan.
std::vector<int> rolling_train_ends(const SurfaceBundle& observed, int h, int windows);

/// Pooled RMSE over windows x ages per population against `observed`.
EvalReport rolling_rmse(const SurfaceBundle& observed, int h, int windows,
                        const WindowForecaster& forecaster);

/// Fits `model` on each training slice of `smoothed` and scores it against
/// `observed` (both on the same grid).
EvalReport rolling_rmse(const SurfaceBundle& observed, const SurfaceBundle& smoothed,
                        ModelKind model, int h, int windows, const ModelConfig& config);

std::vector<double> default_kappa_grid();

/// Whether the fitted model depends on config.kappa.
bool uses_kappa(ModelKind model, const ModelConfig& config);

struct KappaTuning {
  double kappa = 0.0;
  std::vector<double> grid;
  std::vector<double> objective;  // average RMSE per grid value
};

/// Grid search for the kappa minimising the rolling average RMSE; ties go to
/// the smaller kappa.
KappaTuning tune_kappa(const SurfaceBundle& observed, const SurfaceBundle& smoothed, ModelKind model,
                       int h, int windows, const std::vector<double>& grid,
                       const ModelConfig& config);

/// Tunes kappa on the span preceding the evaluation windows (when the model
/// uses it and config.kappa is unset), then runs rolling_rmse on the full span.
EvalReport evaluate_model(const SurfaceBundle& observed, const SurfaceBundle& smoothed,
                          ModelKind model, int h, int windows, ModelConfig config,
                          const std::vector<double>& grid = default_kappa_grid());

std::string eval_csv_header();

/// Appends one row per population, writing the header first if the file is
/// new or empty.
void append_eval_csv(const EvalReport& report, const std::string& path);

}  // namespace mfpca
