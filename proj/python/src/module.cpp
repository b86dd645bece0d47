#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mfpca/arima.hpp"
#include "mfpca/demographics.hpp"
#include "mfpca/error.hpp"
#include "mfpca/evaluation.hpp"
#include "mfpca/forecasters.hpp"
#include "mfpca/hmd.hpp"
#include "mfpca/mfpca.hpp"
#include "mfpca/smoothing.hpp"
#include "mfpca/synthetic.hpp"
#include "mfpca/ufpca.hpp"

namespace py = pybind11;
using namespace mfpca;

namespace {

// Builds a bundle from parallel lists of ids and year x age matrices.
SurfaceBundle make_bundle(const std::vector<std::string>& ids, const std::vector<Eigen::MatrixXd>& curves,
                          const std::vector<int>& years, const std::vector<int>& ages, SurfaceKind kind) {
  if (ids.size() != curves.size()) throw Error(ErrorCode::ShapeMismatch, "python", "ids and curves differ in length");
  SurfaceBundle b;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    MortalitySurface s;
    s.population_id = ids[i];
    s.log_rates = curves[i];
    s.years = years;
    s.ages = ages;
    s.kind = kind;
    b.surfaces.push_back(std::move(s));
  }
  validate_bundle(b);
  return b;
}

WeightScheme weights_for(Eigen::Index T, std::optional<double> kappa, double power) {
  return kappa ? geometric_weights(*kappa, T, power) : uniform_weights(T, power);
}

ComponentRule rule_for(double threshold, std::optional<int> ncomp) {
  ComponentRule r;
  r.threshold = threshold;
  r.override_count = ncomp;
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weighted multivariate FPCA mortality forecasting";

  py::register_exception<Error>(m, "MfpcaError", PyExc_RuntimeError);

  py::enum_<SurfaceKind>(m, "SurfaceKind")
      .value("observed", SurfaceKind::Observed)
      .value("smoothed", SurfaceKind::Smoothed);
  py::enum_<ModelKind>(m, "ModelKind")
      .value("independent", ModelKind::Independent)
      .value("wmfpca", ModelKind::Wmfpca)
      .value("coherent", ModelKind::Coherent)
      .value("product_ratio", ModelKind::ProductRatio);
  py::enum_<SeriesMode>(m, "SeriesMode")
      .value("nonstationary", SeriesMode::Nonstationary)
      .value("stationary", SeriesMode::Stationary);

  py::class_<MortalitySurface>(m, "MortalitySurface")
      .def(py::init<>())
      .def_readwrite("population_id", &MortalitySurface::population_id)
      .def_readwrite("ages", &MortalitySurface::ages)
      .def_readwrite("years", &MortalitySurface::years)
      .def_readwrite("log_rates", &MortalitySurface::log_rates)
      .def_readwrite("kind", &MortalitySurface::kind)
      .def("slice_years", &MortalitySurface::slice_years, py::arg("first"), py::arg("last"))
      .def("__repr__", [](const MortalitySurface& s) {
        return "<MortalitySurface " + s.population_id + " " + std::to_string(s.num_years()) + "x" +
               std::to_string(s.num_ages()) + ">";
      });

  py::class_<SurfaceBundle>(m, "SurfaceBundle")
      .def(py::init<>())
      .def_readwrite("surfaces", &SurfaceBundle::surfaces)
      .def_property_readonly("ages", &SurfaceBundle::ages)
      .def_property_readonly("years", &SurfaceBundle::years)
      .def("slice_years", &SurfaceBundle::slice_years, py::arg("first"), py::arg("last"))
      .def("select", &SurfaceBundle::select, py::arg("population_ids"))
      .def("__len__", &SurfaceBundle::size)
      .def("__getitem__", [](const SurfaceBundle& b, const std::string& id) { return b.at(id); });

  m.def("make_bundle", &make_bundle, py::arg("ids"), py::arg("curves"), py::arg("years"), py::arg("ages"),
        py::arg("kind") = SurfaceKind::Smoothed, "Bundle aligned year x age log-rate matrices.");

  py::class_<ResidualField>(m, "ResidualField")
      .def(py::init<>())
      .def_readwrite("sigma", &ResidualField::sigma)
      .def_readwrite("sigma_avg", &ResidualField::sigma_avg);

  py::class_<SmoothConfig>(m, "SmoothConfig")
      .def(py::init<>())
      .def_readwrite("basis_dim", &SmoothConfig::basis_dim)
      .def_readwrite("penalty_order", &SmoothConfig::penalty_order)
      .def_readwrite("lambda_grid", &SmoothConfig::lambda_grid)
      .def_readwrite("monotone_from_age", &SmoothConfig::monotone_from_age);

  py::class_<SmoothedBundle>(m, "SmoothedBundle")
      .def_readonly("surfaces", &SmoothedBundle::surfaces)
      .def_readonly("residuals", &SmoothedBundle::residuals)
      .def("slice_years", &SmoothedBundle::slice_years, py::arg("first"), py::arg("last"));

  py::class_<SyntheticConfig>(m, "SyntheticConfig")
      .def(py::init<>())
      .def_readwrite("first_year", &SyntheticConfig::first_year)
      .def_readwrite("last_year", &SyntheticConfig::last_year)
      .def_readwrite("max_age", &SyntheticConfig::max_age)
      .def_readwrite("drift", &SyntheticConfig::drift)
      .def_readwrite("index_sd", &SyntheticConfig::index_sd)
      .def_readwrite("deviation_ar", &SyntheticConfig::deviation_ar)
      .def_readwrite("deviation_sd", &SyntheticConfig::deviation_sd)
      .def_readwrite("male_excess", &SyntheticConfig::male_excess)
      .def_readwrite("divergence", &SyntheticConfig::divergence)
      .def_readwrite("noise_sd", &SyntheticConfig::noise_sd)
      .def_readwrite("seed", &SyntheticConfig::seed)
      .def_readwrite("country", &SyntheticConfig::country);

  m.def("load_hmd_file", &load_hmd_file, py::arg("path"), py::arg("max_age") = kDefaultMaxAge,
        py::arg("country") = std::string());
  m.def("read_surface_csv", &read_surface_csv, py::arg("path"), py::arg("kind") = SurfaceKind::Observed);
  m.def("write_surface_csv", &write_surface_csv, py::arg("surface"), py::arg("path"));
  m.def("simulate_two_sex", &simulate_two_sex, py::arg("config") = SyntheticConfig{});
  m.def("smooth_bundle", &smooth_bundle, py::arg("observed"), py::arg("config") = SmoothConfig{});
  m.def("smooth_curve", &smooth_curve, py::arg("log_rates"), py::arg("ages"), py::arg("config") = SmoothConfig{});

  py::class_<WeightScheme>(m, "WeightScheme")
      .def_readonly("kappa", &WeightScheme::kappa)
      .def_readonly("weights", &WeightScheme::weights)
      .def_readonly("power", &WeightScheme::power);
  m.def("geometric_weights", &geometric_weights, py::arg("kappa"), py::arg("T"), py::arg("power") = 1.0);
  m.def("uniform_weights", &uniform_weights, py::arg("T"), py::arg("power") = 1.0);

  py::class_<FpcaFit>(m, "FpcaFit")
      .def_readonly("mean_fn", &FpcaFit::mean_fn)
      .def_readonly("eigenfunctions", &FpcaFit::eigenfunctions)
      .def_readonly("eigenvalues", &FpcaFit::eigenvalues)
      .def_readonly("scores", &FpcaFit::scores)
      .def_readonly("var_explained", &FpcaFit::var_explained)
      .def_readonly("total_variance", &FpcaFit::total_variance)
      .def_property_readonly("num_components", &FpcaFit::num_components);

  py::class_<MfpcaFit>(m, "MfpcaFit")
      .def_readonly("per_pop_fits", &MfpcaFit::per_pop_fits)
      .def_readonly("joint_covariance", &MfpcaFit::joint_covariance)
      .def_readonly("joint_eigenvalues", &MfpcaFit::joint_eigenvalues)
      .def_readonly("block_eigenvectors", &MfpcaFit::block_eigenvectors)
      .def_readonly("multi_eigenfunctions", &MfpcaFit::multi_eigenfunctions)
      .def_readonly("shared_scores", &MfpcaFit::shared_scores)
      .def_readonly("var_explained", &MfpcaFit::var_explained)
      .def_property_readonly("num_components", &MfpcaFit::num_components);

  m.def(
      "fit_ufpca",
      [](const Eigen::MatrixXd& curves, std::optional<double> kappa, double threshold, std::optional<int> ncomp,
         double power) { return fit_ufpca(curves, weights_for(curves.rows(), kappa, power), rule_for(threshold, ncomp)); },
      py::arg("curves"), py::arg("kappa") = py::none(), py::arg("threshold") = 0.9, py::arg("ncomp") = py::none(),
      py::arg("weight_power") = 1.0, "Univariate FPCA of a years x ages matrix.");
  m.def(
      "fit_mfpca",
      [](const std::vector<Eigen::MatrixXd>& curves, std::optional<double> kappa, double threshold,
         std::optional<int> ncomp, double power) {
        if (curves.empty()) throw Error(ErrorCode::EmptyBundle, "python", "no curve sets given");
        return fit_mfpca(curves, weights_for(curves.front().rows(), kappa, power), rule_for(threshold, ncomp));
      },
      py::arg("curves"), py::arg("kappa") = py::none(), py::arg("threshold") = 0.9, py::arg("ncomp") = py::none(),
      py::arg("weight_power") = 1.0, "Multivariate FPCA of aligned years x ages matrices.");

  py::class_<ArimaSpec>(m, "ArimaSpec")
      .def(py::init<>())
      .def_readwrite("p", &ArimaSpec::p)
      .def_readwrite("d", &ArimaSpec::d)
      .def_readwrite("q", &ArimaSpec::q)
      .def_readwrite("include_drift", &ArimaSpec::include_drift)
      .def_readwrite("ar", &ArimaSpec::ar)
      .def_readwrite("ma", &ArimaSpec::ma)
      .def_readwrite("drift", &ArimaSpec::drift)
      .def_readwrite("innovation_var", &ArimaSpec::innovation_var)
      .def_readonly("loglik", &ArimaSpec::loglik)
      .def_readonly("aic", &ArimaSpec::aic)
      .def_readonly("fallback", &ArimaSpec::fallback)
      .def_property_readonly("order", [](const ArimaSpec& s) { return py::make_tuple(s.p, s.d, s.q); });

  py::class_<ScoreForecast>(m, "ScoreForecast")
      .def_readonly("mean", &ScoreForecast::mean)
      .def_readonly("variance", &ScoreForecast::variance)
      .def_readonly("spec", &ScoreForecast::spec);

  m.def(
      "fit_auto",
      [](const Eigen::VectorXd& series, bool stationary, bool allow_constant) {
        ArimaFitOptions o;
        o.mode = stationary ? SeriesMode::Stationary : SeriesMode::Nonstationary;
        o.allow_constant = allow_constant;
        return fit_auto(series, o);
      },
      py::arg("series"), py::arg("stationary") = false, py::arg("allow_constant") = true,
      "Minimum-AIC ARIMA over p, q in 0..2 and d in 0..2 (d = 0 when stationary).");
  m.def("forecast", &forecast, py::arg("spec"), py::arg("series"), py::arg("h"));

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init([](std::optional<double> kappa, double threshold, std::optional<int> ncomp, double power,
                       bool weight_independent) {
             ModelConfig c;
             c.kappa = kappa;
             c.rule = rule_for(threshold, ncomp);
             c.weight_power = power;
             c.weight_independent = weight_independent;
             return c;
           }),
           py::arg("kappa") = py::none(), py::arg("threshold") = 0.9, py::arg("ncomp") = py::none(),
           py::arg("weight_power") = 1.0, py::arg("weight_independent") = false)
      .def_readwrite("kappa", &ModelConfig::kappa)
      .def_readwrite("weight_power", &ModelConfig::weight_power)
      .def_readwrite("weight_independent", &ModelConfig::weight_independent);

  py::class_<ComponentSeries>(m, "ComponentSeries")
      .def_readonly("label", &ComponentSeries::label)
      .def_readonly("scores", &ComponentSeries::scores)
      .def_readonly("basis", &ComponentSeries::basis)
      .def_readonly("mode", &ComponentSeries::mode)
      .def_readonly("spec", &ComponentSeries::spec);

  py::class_<FittedModel>(m, "FittedModel")
      .def_readonly("kind", &FittedModel::kind)
      .def_readonly("population_ids", &FittedModel::population_ids)
      .def_readonly("ages", &FittedModel::ages)
      .def_readonly("years", &FittedModel::years)
      .def_readonly("weights", &FittedModel::weights)
      .def_readonly("base", &FittedModel::base)
      .def_readonly("components", &FittedModel::components)
      .def("fitted_values", [](const FittedModel& fm, std::size_t i) { return fitted_values(fm, i); },
           py::arg("population"));

  py::class_<ForecastSurface>(m, "ForecastSurface")
      .def_readonly("population_id", &ForecastSurface::population_id)
      .def_readonly("ages", &ForecastSurface::ages)
      .def_readonly("horizon_years", &ForecastSurface::horizon_years)
      .def_readonly("mean", &ForecastSurface::mean)
      .def_readonly("variance", &ForecastSurface::variance)
      .def_readonly("lower", &ForecastSurface::lower)
      .def_readonly("upper", &ForecastSurface::upper)
      .def_readonly("alpha", &ForecastSurface::alpha);

  m.def("parse_model_kind", &parse_model_kind, py::arg("name"));
  m.def("fit_model", &fit_model, py::arg("kind"), py::arg("bundle"), py::arg("config") = ModelConfig{});
  m.def("forecast_model",
        py::overload_cast<const FittedModel&, int, const std::vector<ResidualField>&, double>(&forecast_model),
        py::arg("model"), py::arg("h"), py::arg("residuals") = std::vector<ResidualField>{},
        py::arg("alpha") = kDefaultAlpha);
  m.def("normal_quantile_upper", &normal_quantile_upper, py::arg("alpha"));

  py::class_<LifeTable>(m, "LifeTable")
      .def_readonly("m", &LifeTable::m)
      .def_readonly("q", &LifeTable::q)
      .def_readonly("l", &LifeTable::l)
      .def_readonly("e", &LifeTable::e)
      .def_property_readonly("e0", &LifeTable::e0);
  m.def("life_expectancy", &life_expectancy, py::arg("log_rates"));
  m.def("life_expectancy_at_birth", &life_expectancy_at_birth, py::arg("log_rates"));
  m.def("sex_ratio", &sex_ratio, py::arg("log_male"), py::arg("log_female"));

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("model", &EvalReport::model)
      .def_readonly("h", &EvalReport::h)
      .def_readonly("population_ids", &EvalReport::population_ids)
      .def_readonly("rmse", &EvalReport::rmse)
      .def_readonly("avg_rmse", &EvalReport::avg_rmse)
      .def_readonly("windows", &EvalReport::windows)
      .def_readonly("kappa", &EvalReport::kappa);
  m.def("evaluate_model", &evaluate_model, py::arg("observed"), py::arg("smoothed"), py::arg("kind"), py::arg("h"),
        py::arg("windows") = kDefaultWindows, py::arg("config") = ModelConfig{},
        py::arg("grid") = default_kappa_grid());
}
