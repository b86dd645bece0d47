#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>

#include "mfpca/demographics.hpp"
#include "mfpca/error.hpp"
#include "mfpca/evaluation.hpp"
#include "mfpca/forecasters.hpp"
#include "mfpca/hmd.hpp"
#include "mfpca/io.hpp"
#include "mfpca/smoothing.hpp"
#include "mfpca/svg.hpp"
#include "mfpca/synthetic.hpp"

namespace mfpca::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModule = "cli";
constexpr const char* kSmoothedSuffix = ".smoothed.csv";
constexpr const char* kSigmaSuffix = ".sigma.csv";

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorCode::ConfigError, kModule, message);
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::optional<double> parse_kappa(const std::string& text) {
  if (text == "auto") return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    config_error("--kappa must be a number in (0, 1) or 'auto', got '" + text + "'");
  }
  if (!(v > 0.0 && v < 1.0)) config_error("--kappa must lie in (0, 1)");
  return v;
}

// ---------------------------------------------------------------------------
// Data directory handling

struct Dataset {
  std::vector<std::string> ids;
  SurfaceBundle observed;  // empty when no observed files are present
  SmoothedBundle smoothed;
};

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> discover_ids(const fs::path& dir) {
  std::set<std::string> smoothed, observed;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (ends_with(name, kSmoothedSuffix)) {
      smoothed.insert(name.substr(0, name.size() - std::string_view(kSmoothedSuffix).size()));
    } else if (ends_with(name, ".csv") && !ends_with(name, kSigmaSuffix) &&
               first_line(entry.path()) == "year,age,log_rate") {
      observed.insert(name.substr(0, name.size() - 4));
    }
  }
  const auto& chosen = smoothed.empty() ? observed : smoothed;
  return {chosen.begin(), chosen.end()};
}

fs::path resolve_data_dir(const RunConfig& cfg) {
  if (cfg.data_path.empty()) config_error("no data path: pass --data or set MFPCA_DATA_DIR");
  if (!fs::is_directory(cfg.data_path)) config_error("data path is not a directory: " + cfg.data_path.string());
  return cfg.data_path;
}

Dataset load_dataset(const RunConfig& cfg, bool need_observed) {
  const fs::path dir = resolve_data_dir(cfg);
  Dataset d;
  d.ids = cfg.pops.empty() ? discover_ids(dir) : cfg.pops;
  if (d.ids.empty()) config_error("no surfaces found in " + dir.string());

  std::size_t n_obs = 0, n_smooth = 0, n_sigma = 0;
  for (const auto& id : d.ids) {
    n_obs += fs::exists(dir / (id + ".csv"));
    n_smooth += fs::exists(dir / (id + kSmoothedSuffix));
    n_sigma += fs::exists(dir / (id + kSigmaSuffix));
  }
  const std::size_t p = d.ids.size();
  if (n_obs != 0 && n_obs != p) config_error("observed surfaces exist for only some populations");
  if (n_smooth != 0 && n_smooth != p) config_error("smoothed surfaces exist for only some populations");
  if (n_obs == 0 && n_smooth == 0) config_error("no surfaces for the requested populations in " + dir.string());
  if (need_observed && n_obs == 0) config_error("this command needs observed <pop>.csv surfaces");

  if (n_obs == p) {
    for (const auto& id : d.ids) d.observed.surfaces.push_back(read_surface_csv(dir / (id + ".csv")));
    validate_bundle(d.observed);
  }
  if (n_smooth == p) {
    for (const auto& id : d.ids) {
      d.smoothed.surfaces.surfaces.push_back(read_surface_csv(dir / (id + kSmoothedSuffix), SurfaceKind::Smoothed));
    }
    validate_bundle(d.smoothed.surfaces);
    if (n_sigma == p) {
      for (const auto& id : d.ids) {
        ResidualField r = read_sigma_csv(dir / (id + kSigmaSuffix));
        if (r.sigma.rows() != d.smoothed.surfaces.surfaces.front().num_years() ||
            r.sigma.cols() != d.smoothed.surfaces.surfaces.front().num_ages()) {
          throw Error(ErrorCode::ShapeMismatch, kModule, "sigma grid for " + id + " does not match its surface");
        }
        d.smoothed.residuals.push_back(std::move(r));
      }
    } else if (n_sigma != 0) {
      config_error("sigma files exist for only some populations");
    }
  } else {
    d.smoothed = smooth_bundle(d.observed, SmoothConfig{});
  }
  if (!d.observed.empty() && (d.observed.years() != d.smoothed.surfaces.years() ||
                              d.observed.ages() != d.smoothed.surfaces.ages())) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "observed and smoothed surfaces differ in grid");
  }

  const auto& years = d.smoothed.surfaces.years();
  const int first = cfg.train_start.value_or(years.front());
  const int last = cfg.train_end.value_or(years.back());
  if (first < years.front() || last > years.back() || last - first + 1 < kMinTrainingYears) {
    std::ostringstream os;
    os << "training span " << first << ".." << last << " must lie within " << years.front() << ".."
       << years.back() << " and cover at least " << kMinTrainingYears << " years";
    config_error(os.str());
  }
  if (first != years.front() || last != years.back()) {
    d.smoothed = d.smoothed.slice_years(first, last);
    if (!d.observed.empty()) d.observed = d.observed.slice_years(first, last);
  }
  return d;
}

std::string country_of(const RunConfig& cfg, const std::vector<std::string>& ids) {
  if (!cfg.country.empty()) return cfg.country;
  const auto pos = ids.front().rfind('_');
  return pos == std::string::npos ? "unknown" : ids.front().substr(0, pos);
}

// ---------------------------------------------------------------------------
// Model configuration

ModelConfig base_model_config(const RunConfig& cfg) {
  ModelConfig mc;
  mc.rule.threshold = cfg.var_threshold;
  mc.rule.override_count = cfg.ncomp;
  mc.weight_power = cfg.weight_power;
  mc.weight_independent = cfg.weight_independent;
  mc.kappa = parse_kappa(cfg.kappa);
  return mc;
}

struct ResolvedModel {
  ModelKind kind;
  ModelConfig config;
  std::optional<KappaTuning> tuning;
};

ResolvedModel resolve_model(const RunConfig& cfg, const std::string& name, const Dataset& d) {
  ResolvedModel r{parse_model_kind(name), base_model_config(cfg), std::nullopt};
  if (!r.config.kappa && uses_kappa(r.kind, r.config)) {
    const SurfaceBundle& truth = d.observed.empty() ? d.smoothed.surfaces : d.observed;
    r.tuning = tune_kappa(truth, d.smoothed.surfaces, r.kind, cfg.horizons.front(), cfg.windows,
                          default_kappa_grid(), r.config);
    r.config.kappa = r.tuning->kappa;
  }
  return r;
}

std::vector<ResidualField> residuals_of(const Dataset& d) { return d.smoothed.residuals; }

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, kModule, "cannot create " + dir.string() + ": " + ec.message());
}

void write_tuning(const KappaTuning& t, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, kModule, "cannot write " + path.string());
  out << std::setprecision(17) << "kappa,avg_rmse\n";
  for (std::size_t k = 0; k < t.grid.size(); ++k) out << t.grid[k] << ',' << t.objective[k] << '\n';
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// ---------------------------------------------------------------------------
// Subcommands

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  SyntheticConfig sc;
  sc.first_year = cfg.first_year;
  sc.last_year = cfg.last_year;
  sc.max_age = cfg.max_age;
  sc.divergence = cfg.divergence;
  sc.seed = cfg.seed;
  if (!cfg.country.empty()) sc.country = cfg.country;
  const SurfaceBundle b = simulate_two_sex(sc);
  make_dir(cfg.output_dir);
  for (const auto& s : b.surfaces) {
    const fs::path path = cfg.output_dir / (s.population_id + ".csv");
    write_surface_csv(s, path);
    out << "wrote " << path.string() << '\n';
  }
  return 0;
}

int cmd_ingest(const RunConfig& cfg, std::ostream& out) {
  if (cfg.data_path.empty()) config_error("no data path: pass --data or set MFPCA_DATA_DIR");
  fs::path file = cfg.data_path;
  if (fs::is_directory(file)) file /= "Mx_1x1.txt";
  if (!fs::exists(file)) config_error("HMD rate file not found: " + file.string());
  SurfaceBundle b = load_hmd_file(file, cfg.max_age, cfg.country);
  if (!cfg.pops.empty()) b = b.select(cfg.pops);
  if (cfg.train_start || cfg.train_end) {
    b = b.slice_years(cfg.train_start.value_or(b.years().front()), cfg.train_end.value_or(b.years().back()));
  }
  make_dir(cfg.output_dir);
  for (const auto& s : b.surfaces) {
    const fs::path path = cfg.output_dir / (s.population_id + ".csv");
    write_surface_csv(s, path);
    out << "wrote " << path.string() << '\n';
  }
  return 0;
}

int cmd_smooth(const RunConfig& cfg, std::ostream& out) {
  Dataset d = load_dataset(cfg, true);
  const SmoothedBundle sm = smooth_bundle(d.observed, SmoothConfig{});
  make_dir(cfg.output_dir);
  for (std::size_t i = 0; i < sm.surfaces.size(); ++i) {
    const auto& s = sm.surfaces.surfaces[i];
    const fs::path sp = cfg.output_dir / (s.population_id + kSmoothedSuffix);
    const fs::path rp = cfg.output_dir / (s.population_id + kSigmaSuffix);
    write_surface_csv(s, sp);
    write_sigma_csv(s, sm.residuals[i], rp);
    out << "wrote " << sp.string() << '\n' << "wrote " << rp.string() << '\n';
  }
  return 0;
}

int cmd_fit(const RunConfig& cfg, std::ostream& out) {
  const Dataset d = load_dataset(cfg, false);
  std::vector<std::pair<ResolvedModel, FittedModel>> fits;
  for (const auto& name : cfg.models) {
    ResolvedModel r = resolve_model(cfg, name, d);
    FittedModel m = fit_model(r.kind, d.smoothed.surfaces, r.config);
    fits.emplace_back(std::move(r), std::move(m));
  }
  make_dir(cfg.output_dir);
  for (const auto& [r, m] : fits) {
    const fs::path root = write_model(m, cfg.output_dir);
    if (r.tuning) write_tuning(*r.tuning, root / "kappa_tuning.csv");
    out << "wrote " << root.string() << " (" << m.components.size() << " components";
    if (uses_kappa(r.kind, r.config)) out << ", kappa " << *r.config.kappa;
    out << ")\n";
  }
  return 0;
}

int cmd_forecast(const RunConfig& cfg, std::ostream& out) {
  const Dataset d = load_dataset(cfg, false);
  const int h = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
  struct Result {
    std::string name;
    std::vector<ForecastSurface> surfaces;
  };
  std::vector<Result> results;
  for (const auto& name : cfg.models) {
    const ResolvedModel r = resolve_model(cfg, name, d);
    const FittedModel m = fit_model(r.kind, d.smoothed.surfaces, r.config);
    results.push_back({std::string(to_string(r.kind)), forecast_model(m, h, residuals_of(d), cfg.alpha)});
  }
  make_dir(cfg.output_dir);
  for (const auto& res : results) {
    const fs::path dir = cfg.output_dir / res.name;
    make_dir(dir);
    for (std::size_t i = 0; i < res.surfaces.size(); ++i) {
      const ForecastSurface& f = res.surfaces[i];
      const fs::path path = dir / ("forecast_" + f.population_id + ".csv");
      write_forecast_csv(f, path);
      out << "wrote " << path.string() << '\n';
      if (cfg.plot) {
        const auto last = static_cast<Eigen::Index>(f.horizon_years.size() - 1);
        std::vector<double> ages(f.ages.begin(), f.ages.end());
        const auto& hist = d.smoothed.surfaces.surfaces[i];
        std::vector<SvgSeries> series{
            {"last fitted year", to_std(hist.log_rates.row(hist.num_years() - 1).transpose()), false},
            {"forecast " + std::to_string(f.horizon_years.back()), to_std(f.mean.row(last).transpose()), false},
            {"lower", to_std(f.lower.row(last).transpose()), true},
            {"upper", to_std(f.upper.row(last).transpose()), true}};
        const fs::path svg = dir / ("forecast_" + f.population_id + ".svg");
        write_line_chart(svg, res.name + ": " + f.population_id + " log mortality", "age", ages, series);
        out << "wrote " << svg.string() << '\n';
      }
    }
  }
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const Dataset d = load_dataset(cfg, true);
  const std::string country = country_of(cfg, d.ids);
  std::vector<EvalReport> reports;
  for (const auto& name : cfg.models) {
    const ModelKind kind = parse_model_kind(name);
    for (int h : cfg.horizons) {
      EvalReport r = evaluate_model(d.observed, d.smoothed.surfaces, kind, h, cfg.windows, base_model_config(cfg));
      r.country = country;
      reports.push_back(std::move(r));
    }
  }
  make_dir(cfg.output_dir);
  const fs::path path = cfg.output_dir / "eval.csv";
  for (const auto& r : reports) {
    append_eval_csv(r, path);
    out << r.model << " h=" << r.h << " avg_rmse=" << std::setprecision(6) << r.avg_rmse;
    if (r.kappa) out << " kappa=" << *r.kappa;
    out << '\n';
  }
  out << "appended " << path.string() << '\n';
  return 0;
}

std::pair<std::size_t, std::size_t> sex_indices(const std::vector<std::string>& ids) {
  std::optional<std::size_t> male, female;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ends_with(ids[i], "_male") || ids[i] == "male") male = i;
    if (ends_with(ids[i], "_female") || ids[i] == "female") female = i;
  }
  if (!male || !female) config_error("diagnose needs one *_male and one *_female population");
  return {*male, *female};
}

int cmd_diagnose(const RunConfig& cfg, std::ostream& out) {
  const Dataset d = load_dataset(cfg, false);
  const auto [mi, fi] = sex_indices(d.ids);
  const SurfaceBundle& hist = d.observed.empty() ? d.smoothed.surfaces : d.observed;
  const int h = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());

  struct Result {
    std::string name;
    std::vector<int> years;
    Eigen::MatrixXd ratio;
    Eigen::VectorXd e0_male, e0_female;
  };
  std::vector<Result> results;
  for (const auto& name : cfg.models) {
    const ResolvedModel r = resolve_model(cfg, name, d);
    const FittedModel m = fit_model(r.kind, d.smoothed.surfaces, r.config);
    const std::vector<ForecastSurface> f = forecast_model(m, h, {}, cfg.alpha);
    const Eigen::Index T = hist.surfaces[mi].num_years();
    const Eigen::Index J = hist.surfaces[mi].num_ages();
    Eigen::MatrixXd male(T + h, J), female(T + h, J);
    male << hist.surfaces[mi].log_rates, f[mi].mean;
    female << hist.surfaces[fi].log_rates, f[fi].mean;
    Result res{std::string(to_string(r.kind)), hist.years(), sex_ratio(male, female),
               life_expectancy_at_birth(male), life_expectancy_at_birth(female)};
    res.years.insert(res.years.end(), f[mi].horizon_years.begin(), f[mi].horizon_years.end());
    results.push_back(std::move(res));
  }
  make_dir(cfg.output_dir);
  for (const auto& res : results) {
    const fs::path dir = cfg.output_dir / res.name;
    make_dir(dir);
    write_sex_ratio_csv(res.years, hist.ages(), res.ratio, dir / "sex_ratio.csv");
    write_e0_csv(res.years, res.e0_male, res.e0_female, dir / "e0.csv");
    out << "wrote " << (dir / "sex_ratio.csv").string() << '\n' << "wrote " << (dir / "e0.csv").string() << '\n';
    if (cfg.plot) {
      const std::vector<double> xs(res.years.begin(), res.years.end());
      write_line_chart(dir / "e0.svg", res.name + ": life expectancy at birth", "year", xs,
                       {{"male", to_std(res.e0_male), false}, {"female", to_std(res.e0_female), false}});
      std::vector<SvgSeries> ratio_series;
      for (int age : {0, 20, 40, 60, 80}) {
        const auto& ages = hist.ages();
        const auto it = std::find(ages.begin(), ages.end(), age);
        if (it == ages.end()) continue;
        ratio_series.push_back({"age " + std::to_string(age), to_std(res.ratio.col(it - ages.begin())), false});
      }
      write_line_chart(dir / "sex_ratio.svg", res.name + ": mortality sex ratio", "year", xs, ratio_series);
      out << "wrote " << (dir / "e0.svg").string() << '\n' << "wrote " << (dir / "sex_ratio.svg").string() << '\n';
    }
  }
  return 0;
}

}  // namespace

void RunConfig::validate() const {
  if (models.empty()) config_error("--model needs at least one model");
  for (const auto& m : models) parse_model_kind(m);
  if (horizons.empty()) config_error("--h needs at least one horizon");
  for (int h : horizons) {
    if (h < 1) config_error("--h must be >= 1");
  }
  parse_kappa(kappa);
  if (!(var_threshold > 0.0 && var_threshold <= 1.0)) config_error("--var-threshold must lie in (0, 1]");
  if (ncomp && *ncomp < 0) config_error("--ncomp must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) config_error("--alpha must lie in (0, 1)");
  if (windows < 1) config_error("--windows must be >= 1");
  if (weight_power != 1.0 && weight_power != 0.5) config_error("--weight-power must be 1 or 0.5");
  if (max_age < 1 || max_age > 100) config_error("--max-age must lie in 1..100");
  if (train_start && train_end && *train_end < *train_start) config_error("--train-end precedes --train-start");
  if (output_dir.empty()) config_error("--out must not be empty");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string data, out_dir = cfg.output_dir.string();
  int ncomp = -1;
  std::optional<int> train_start, train_end;

  CLI::App app{"Multi-population mortality modelling and forecasting with functional PCA", "mfpca"};
  app.set_help_flag("--help", "Print help and exit");
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "Flat key = value file; command-line flags override it");
  app.allow_config_extras(false);

  app.add_option("--data", data, "Data directory (or HMD rate file for ingest); default $MFPCA_DATA_DIR");
  app.add_option("--model", cfg.models, "independent, wmfpca, coherent, product_ratio (comma list)")
      ->delimiter(',');
  app.add_option("--h", cfg.horizons, "Forecast horizon(s) (comma list)")->delimiter(',');
  app.add_option("--kappa", cfg.kappa, "Geometric weight parameter in (0,1) or 'auto'");
  app.add_option("--var-threshold", cfg.var_threshold, "Cumulative variance share P");
  app.add_option("--ncomp", ncomp, "Fixed component count (overrides --var-threshold)");
  app.add_option("--alpha", cfg.alpha, "Prediction interval level");
  app.add_option("--windows", cfg.windows, "Rolling windows");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", cfg.seed, "Seed for simulate");
  app.add_flag("--plot", cfg.plot, "Also write SVG charts");
  app.add_option("--weight-power", cfg.weight_power, "Exponent on the weights when scaling curves (1 or 0.5)");
  app.add_flag("--weight-independent", cfg.weight_independent, "Apply geometric weights to the independent model");
  app.add_option("--train-start", train_start, "First training year");
  app.add_option("--train-end", train_end, "Last training year");
  app.add_option("--pops", cfg.pops, "Population ids (comma list)")->delimiter(',');
  app.add_option("--max-age", cfg.max_age, "Highest age kept on ingest");
  app.add_option("--country", cfg.country, "Country label");
  app.add_option("--divergence", cfg.divergence, "Extra male slope per year (simulate)");
  app.add_option("--first-year", cfg.first_year, "First simulated year");
  app.add_option("--last-year", cfg.last_year, "Last simulated year");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"ingest", "Parse an HMD Mx_1x1 file into <pop>.csv surfaces"},
      {"smooth", "Smooth observed surfaces into <pop>.smoothed.csv and <pop>.sigma.csv"},
      {"fit", "Fit models and write their decomposition"},
      {"forecast", "Forecast with prediction intervals"},
      {"evaluate", "Rolling-window RMSE; appends eval.csv"},
      {"diagnose", "Sex ratios and life expectancy of forecasts"},
      {"simulate", "Write a synthetic two-sex dataset"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->set_help_flag("--help", "Print help and exit");
    subs[name] = sub;
  }

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        out << app.help();
        return 0;
      }
      throw Error(ErrorCode::ConfigError, kModule, e.what());
    }

    if (data.empty()) {
      if (const char* env = std::getenv("MFPCA_DATA_DIR")) data = env;
    }
    cfg.data_path = data;
    cfg.output_dir = out_dir;
    if (ncomp >= 0) cfg.ncomp = ncomp;
    if (app.get_option("--ncomp")->count() > 0 && ncomp < 0) config_error("--ncomp must be >= 0");
    cfg.train_start = train_start;
    cfg.train_end = train_end;
    cfg.validate();

    if (subs["simulate"]->parsed()) return cmd_simulate(cfg, out);
    if (subs["ingest"]->parsed()) return cmd_ingest(cfg, out);
    if (subs["smooth"]->parsed()) return cmd_smooth(cfg, out);
    if (subs["fit"]->parsed()) return cmd_fit(cfg, out);
    if (subs["forecast"]->parsed()) return cmd_forecast(cfg, out);
    if (subs["evaluate"]->parsed()) return cmd_evaluate(cfg, out);
    if (subs["diagnose"]->parsed()) return cmd_diagnose(cfg, out);
    config_error("no command given");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigError ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: io: IoError: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mfpca::cli
