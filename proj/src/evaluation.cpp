#include "mfpca/evaluation.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mfpca/error.hpp"

namespace mfpca {

namespace {
constexpr const char* kModule = "evaluation";

// Shortest text that round-trips.
std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
}  // namespace

std::vector<int> rolling_train_ends(const SurfaceBundle& observed, int h, int windows) {
  if (h < 1) throw Error(ErrorCode::InvalidArgument, kModule, "horizon must be >= 1");
  if (windows < 1) throw Error(ErrorCode::InvalidArgument, kModule, "windows must be >= 1");
  if (observed.empty()) throw Error(ErrorCode::EmptyBundle, kModule, "bundle has no surfaces");
  const auto& years = observed.years();
  const int first = years.front();
  const int last = years.back();
  const int first_end = last - windows + 1 - h;
  if (first_end - first + 1 < kMinTrainingYears) {
    std::ostringstream os;
    os << "years " << first << ".." << last << " cannot hold " << windows << " windows at h=" << h
       << " with at least " << kMinTrainingYears << " training years";
    throw Error(ErrorCode::InsufficientSpan, kModule, os.str());
  }
  std::vector<int> ends;
  for (int w = 0; w < windows; ++w) ends.push_back(first_end + w);
  return ends;
}

EvalReport rolling_rmse(const SurfaceBundle& observed, int h, int windows,
                        const WindowForecaster& forecaster) {
  validate_bundle(observed);
  const std::vector<int> ends = rolling_train_ends(observed, h, windows);
  const std::size_t p = observed.size();
  const Eigen::Index J = static_cast<Eigen::Index>(observed.ages().size());

  Eigen::VectorXd sse = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (int end : ends) {
    const std::vector<Eigen::VectorXd> fc = forecaster(end, h);
    if (fc.size() != p) throw Error(ErrorCode::ShapeMismatch, kModule, "forecaster returned wrong population count");
    for (std::size_t i = 0; i < p; ++i) {
      const auto& s = observed.surfaces[i];
      if (fc[i].size() != J) throw Error(ErrorCode::ShapeMismatch, kModule, "forecast has wrong age count");
      const Eigen::VectorXd truth = s.log_rates.row(s.year_index(end + h)).transpose();
      sse(static_cast<Eigen::Index>(i)) += (truth - fc[i]).squaredNorm();
    }
  }

  EvalReport r;
  r.h = h;
  r.windows = windows;
  for (const auto& s : observed.surfaces) r.population_ids.push_back(s.population_id);
  r.rmse = (sse / (static_cast<double>(windows) * static_cast<double>(J))).cwiseSqrt();
  r.avg_rmse = r.rmse.mean();
  return r;
}

EvalReport rolling_rmse(const SurfaceBundle& observed, const SurfaceBundle& smoothed,
                        ModelKind model, int h, int windows, const ModelConfig& config) {
  validate_bundle(smoothed);
  if (smoothed.ages() != observed.ages() || smoothed.years() != observed.years() ||
      smoothed.size() != observed.size()) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "observed and smoothed bundles differ in grid");
  }
  const int first = smoothed.years().front();
  WindowForecaster fc = [&](int end, int horizon) {
    const FittedModel m = fit_model(model, smoothed.slice_years(first, end), config);
    const std::vector<ForecastSurface> f = forecast_model(m, horizon);
    std::vector<Eigen::VectorXd> out;
    for (const auto& s : f) out.push_back(s.mean.row(horizon - 1).transpose());
    return out;
  };
  EvalReport r = rolling_rmse(observed, h, windows, fc);
  r.model = std::string(to_string(model));
  if (uses_kappa(model, config)) r.kappa = config.kappa;
  return r;
}

std::vector<double> default_kappa_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(0.05 * k);
  return grid;
}

bool uses_kappa(ModelKind model, const ModelConfig& config) {
  switch (model) {
    case ModelKind::Wmfpca:
    case ModelKind::Coherent: return true;
    case ModelKind::Independent: return config.weight_independent;
    case ModelKind::ProductRatio: return false;
  }
  return false;
}

KappaTuning tune_kappa(const SurfaceBundle& observed, const SurfaceBundle& smoothed, ModelKind model,
                       int h, int windows, const std::vector<double>& grid,
                       const ModelConfig& config) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, kModule, "kappa grid is empty");
  for (double k : grid) {
    if (!(k > 0.0 && k < 1.0)) throw Error(ErrorCode::KappaOutOfRange, kModule, "grid values must lie in (0, 1)");
  }
  KappaTuning out;
  out.grid = grid;
  bool have = false;
  double best = 0.0;
  for (double k : grid) {
    ModelConfig c = config;
    c.kappa = k;
    const double v = rolling_rmse(observed, smoothed, model, h, windows, c).avg_rmse;
    out.objective.push_back(v);
    if (!have || v < best || (v == best && k < out.kappa)) {
      best = v;
      out.kappa = k;
      have = true;
    }
  }
  return out;
}

EvalReport evaluate_model(const SurfaceBundle& observed, const SurfaceBundle& smoothed,
                          ModelKind model, int h, int windows, ModelConfig config,
                          const std::vector<double>& grid) {
  rolling_train_ends(observed, h, windows);
  if (uses_kappa(model, config) && !config.kappa) {
    const auto& years = observed.years();
    const int tune_last = years.back() - windows;
    config.kappa = tune_kappa(observed.slice_years(years.front(), tune_last),
                              smoothed.slice_years(years.front(), tune_last), model, h, windows, grid,
                              config)
                       .kappa;
  }
  return rolling_rmse(observed, smoothed, model, h, windows, config);
}

std::string eval_csv_header() { return "country,model,h,pop,rmse,avg_rmse,windows,kappa"; }

void append_eval_csv(const EvalReport& report, const std::string& path) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::IoError, kModule, "cannot write " + path);
  if (fresh) out << eval_csv_header() << '\n';
  for (std::size_t i = 0; i < report.population_ids.size(); ++i) {
    out << report.country << ',' << report.model << ',' << report.h << ',' << report.population_ids[i]
        << ',' << format_double(report.rmse(static_cast<Eigen::Index>(i))) << ','
        << format_double(report.avg_rmse) << ',' << report.windows << ','
        << (report.kappa ? format_double(*report.kappa) : std::string()) << '\n';
  }
}

}  // namespace mfpca
