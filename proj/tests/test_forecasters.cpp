#include <doctest.h>

#include <cmath>

#include "mfpca/error.hpp"
#include "mfpca/forecasters.hpp"
#include "mfpca/smoothing.hpp"
#include "mfpca/synthetic.hpp"
#include "support.hpp"

using namespace mfpca;
using testsupport::Gen;
using testsupport::max_abs;

namespace {

ModelConfig config_with(double kappa, double threshold = 0.9) {
  ModelConfig c;
  c.kappa = kappa;
  c.rule.threshold = threshold;
  return c;
}

SmoothedBundle japan_style(double divergence = 0.0, std::uint64_t seed = 20240101) {
  SyntheticConfig sc;
  sc.first_year = 1947;
  sc.last_year = 1996;
  sc.divergence = divergence;
  sc.seed = seed;
  return smooth_bundle(simulate_two_sex(sc));
}

const ModelKind kAllModels[] = {ModelKind::Independent, ModelKind::Wmfpca, ModelKind::Coherent,
                                ModelKind::ProductRatio};

}  // namespace

TEST_CASE("model names round trip") {
  for (ModelKind k : kAllModels) CHECK(parse_model_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_model_kind("lee_carter"), Error);
}

TEST_CASE("independent model on one population is ufpca plus score forecasts") {
  Gen g(12);
  const SurfaceBundle b = testsupport::make_bundle({testsupport::trending_curves(g, 30, 15, -1.0, 0.02)});
  ModelConfig cfg;
  const FittedModel m = fit_independent(b, cfg);
  const FpcaFit u = fit_ufpca(b.surfaces[0].log_rates, uniform_weights(30), cfg.rule);
  Eigen::MatrixXd expected = u.mean_fn.transpose().replicate(10, 1);
  for (Eigen::Index n = 0; n < u.num_components(); ++n) {
    const ScoreForecast f = forecast(fit_auto(u.scores.col(n)), u.scores.col(n), 10);
    expected += f.mean * u.eigenfunctions.row(n);
  }
  const auto fc = forecast_model(m, 10);
  CHECK(max_abs(fc[0].mean - expected) < 1e-12);
}

TEST_CASE("independent forecasts diverge for separating trends") {
  Gen g(77);
  const Eigen::MatrixXd a = testsupport::trending_curves(g, 40, 12, -1.0, 0.01);
  const Eigen::MatrixXd b = testsupport::trending_curves(g, 40, 12, -3.0, 0.01);
  const FittedModel m = fit_independent(testsupport::make_bundle({a, b}), ModelConfig{});
  const auto fc = forecast_model(m, 50);
  const double gap1 = (fc[0].mean.row(0) - fc[1].mean.row(0)).norm();
  const double gap50 = (fc[0].mean.row(49) - fc[1].mean.row(49)).norm();
  CHECK(gap50 > gap1);
}

TEST_CASE("near-zero kappa reproduces the uniform-weight mfpca forecast") {
  const SmoothedBundle sb = japan_style();
  const ModelConfig cfg = config_with(1e-6);
  const FittedModel m = fit_wmfpca(sb.surfaces, 1e-6, cfg);
  const auto fc = forecast_model(m, 20);

  const Eigen::Index T = static_cast<Eigen::Index>(sb.surfaces.years().size());
  const MfpcaFit uf = fit_mfpca(sb.surfaces, uniform_weights(T), cfg.rule);
  for (std::size_t i = 0; i < 2; ++i) {
    Eigen::MatrixXd expected = uf.per_pop_fits[i].mean_fn.transpose().replicate(20, 1);
    for (Eigen::Index n = 0; n < uf.num_components(); ++n) {
      const Eigen::VectorXd s = uf.shared_scores.col(n);
      expected += forecast(fit_auto(s), s, 20).mean * uf.multi_eigenfunctions[i].row(n);
    }
    CHECK(max_abs(fc[i].mean - expected) < 1e-3);
  }
}

TEST_CASE("single common factor forecast matches a hand-built oracle") {
  Gen g(5150);
  const int T = 40, J = 8;
  const Eigen::VectorXd k = g.random_walk(T, -0.8, 0.5);
  Eigen::VectorXd psi1 = Eigen::VectorXd::LinSpaced(J, 1.0, 0.2);
  Eigen::VectorXd psi2 = Eigen::VectorXd::LinSpaced(J, 0.5, 1.5);
  const Eigen::VectorXd mu1 = Eigen::VectorXd::LinSpaced(J, -8, -2), mu2 = Eigen::VectorXd::LinSpaced(J, -7, -1);
  const Eigen::MatrixXd Y1 = mu1.transpose().replicate(T, 1) + k * psi1.transpose();
  const Eigen::MatrixXd Y2 = mu2.transpose().replicate(T, 1) + k * psi2.transpose();
  const double kappa = 0.3;
  const FittedModel m = fit_wmfpca(testsupport::make_bundle({Y1, Y2}), kappa, config_with(kappa));
  REQUIRE(m.components.size() == 1);

  // Oracle: stacked unit direction, weighted means, projected score, ARIMA on it.
  const WeightScheme w = geometric_weights(kappa, T);
  Eigen::VectorXd dir(2 * J);
  dir << psi1, psi2;
  const double norm = dir.norm();
  dir /= norm;
  if (std::abs(dir.minCoeff()) > std::abs(dir.maxCoeff())) dir = -dir;
  Eigen::MatrixXd stacked(T, 2 * J);
  stacked << Y1, Y2;
  const Eigen::VectorXd mean = stacked.transpose() * w.weights;
  const Eigen::VectorXd score = (stacked.rowwise() - mean.transpose()) * dir;
  const ScoreForecast sf = forecast(fit_auto(score), score, 15);
  const auto fc = forecast_model(m, 15);
  const Eigen::MatrixXd oracle1 = mean.head(J).transpose().replicate(15, 1) + sf.mean * dir.head(J).transpose();
  const Eigen::MatrixXd oracle2 = mean.tail(J).transpose().replicate(15, 1) + sf.mean * dir.tail(J).transpose();
  CHECK(max_abs(fc[0].mean - oracle1) < 1e-6);
  CHECK(max_abs(fc[1].mean - oracle2) < 1e-6);
}

TEST_CASE("coherent model with identical populations") {
  const SmoothedBundle sb = japan_style();
  SurfaceBundle twins;
  twins.surfaces = {sb.surfaces.surfaces[0], sb.surfaces.surfaces[0]};
  twins.surfaces[1].population_id = "twin";
  const FittedModel m = fit_coherent(twins, 0.2, config_with(0.2));
  REQUIRE(m.coherent_fit.has_value());
  for (const auto& eta : m.coherent_fit->deviation_means) CHECK(max_abs(eta) < 1e-10);
  const auto& dev = m.coherent_fit->deviation_fit;
  for (Eigen::Index n = 0; n < dev.num_components(); ++n) {
    CHECK(max_abs(dev.multi_eigenfunctions[0].row(n) - dev.multi_eigenfunctions[1].row(n)) < 1e-10);
  }
  const auto fc = forecast_model(m, 30, sb.residuals.size() ? std::vector<ResidualField>{sb.residuals[0], sb.residuals[0]}
                                                           : std::vector<ResidualField>{});
  CHECK(max_abs(fc[0].mean - fc[1].mean) < 1e-10);
  CHECK(max_abs(fc[0].variance - fc[1].variance) < 1e-10);
}

TEST_CASE("coherent deviation scores have zero weighted mean") {
  const SmoothedBundle sb = japan_style(0.003);
  for (double kappa : {0.05, 0.3, 0.7}) {
    const FittedModel m = fit_coherent(sb.surfaces, kappa, config_with(kappa));
    const auto& dev = m.coherent_fit->deviation_fit;
    const Eigen::VectorXd wm = dev.shared_scores.transpose() * m.weights.weights;
    CHECK((wm.size() == 0 || max_abs(wm) <= 1e-8));
  }
}

TEST_CASE("coherent and product-ratio gaps converge to the mean gap") {
  const SmoothedBundle sb = japan_style();
  for (ModelKind kind : {ModelKind::Coherent, ModelKind::ProductRatio}) {
    const FittedModel m = fit_model(kind, sb.surfaces, config_with(0.1));
    const auto fc = forecast_model(m, 500);
    const Eigen::VectorXd mean_gap = m.base[0] - m.base[1];
    const Eigen::VectorXd gap = (fc[0].mean.row(499) - fc[1].mean.row(499)).transpose();
    CHECK(max_abs(gap - mean_gap) < 1e-3);
  }
}

TEST_CASE("product-ratio decomposition") {
  const SmoothedBundle sb = japan_style();
  const FittedModel m = fit_product_ratio(sb.surfaces, ModelConfig{});
  const auto& pr = *m.product_ratio_fit;
  const Eigen::MatrixXd l = (sb.surfaces.surfaces[0].log_rates + sb.surfaces.surfaces[1].log_rates) / 2.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const Eigen::MatrixXd r = sb.surfaces.surfaces[i].log_rates - l;
    // l + r reproduces the input in log scale
    CHECK(max_abs(l + r - sb.surfaces.surfaces[i].log_rates) < 1e-12);
    CHECK(max_abs(pr.ratio_fits[i].mean_fn - r.colwise().mean().transpose()) < 1e-10);
  }
  CHECK(max_abs(pr.product_fit.mean_fn - l.colwise().mean().transpose()) < 1e-10);
  for (const auto& c : m.components) {
    if (c.label.find("ratio") != std::string::npos) {
      CHECK(c.mode == SeriesMode::Stationary);
      CHECK(c.spec.d == 0);
    } else {
      CHECK(c.mode == SeriesMode::Nonstationary);
    }
  }

  SurfaceBundle twins;
  twins.surfaces = {sb.surfaces.surfaces[1], sb.surfaces.surfaces[1]};
  twins.surfaces[0].population_id = "twin";
  const FittedModel t = fit_product_ratio(twins, ModelConfig{});
  for (const auto& rf : t.product_ratio_fit->ratio_fits) {
    CHECK(max_abs(rf.mean_fn) < 1e-12);
    CHECK(rf.num_components() == 0);
  }
  const auto fc = forecast_model(t, 10);
  const FpcaFit& p = t.product_ratio_fit->product_fit;
  Eigen::MatrixXd product_fc = p.mean_fn.transpose().replicate(10, 1);
  for (Eigen::Index n = 0; n < p.num_components(); ++n) {
    product_fc += forecast(t.components[static_cast<std::size_t>(n)].spec, p.scores.col(n), 10).mean * p.eigenfunctions.row(n);
  }
  CHECK(max_abs(fc[0].mean - product_fc) < 1e-10);
  CHECK(max_abs(fc[1].mean - product_fc) < 1e-10);
}

TEST_CASE("full-rank models reproduce the training curves") {
  Gen g(64);
  const int T = 14, J = 10;
  const SurfaceBundle b = testsupport::make_bundle({g.matrix(T, J), g.matrix(T, J), g.matrix(T, J)});
  for (ModelKind kind : kAllModels) {
    const FittedModel m = fit_model(kind, b, config_with(0.25, 1.0));
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(max_abs(fitted_values(m, i) - b.surfaces[i].log_rates) < 1e-6);
    }
  }
}

TEST_CASE("interval construction") {
  CHECK(normal_quantile_upper(0.05) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(std::abs(normal_quantile_upper(0.05) - 1.959963984540054) < 1e-12);
  for (double bad : {0.0, 1.0, -0.1}) {
    try {
      normal_quantile_upper(bad);
      FAIL("expected AlphaOutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::AlphaOutOfRange);
    }
  }
  Gen g(3);
  const Eigen::MatrixXd mean = g.matrix(3, 4);
  const ForecastSurface flat = predict_interval("x", {0, 1, 2, 3}, {1, 2, 3}, mean, Eigen::MatrixXd::Zero(3, 4));
  CHECK(flat.lower == mean);
  CHECK(flat.upper == mean);
  const Eigen::MatrixXd var = g.matrix(3, 4).cwiseAbs();
  const ForecastSurface f = predict_interval("x", {0, 1, 2, 3}, {1, 2, 3}, mean, var, 0.1);
  const double z = normal_quantile_upper(0.1);
  CHECK(max_abs(f.lower - (mean.array() - z * var.array().sqrt()).matrix()) < 1e-14);
  CHECK(max_abs(f.upper - (mean.array() + z * var.array().sqrt()).matrix()) < 1e-14);
  CHECK((f.lower.array() <= f.mean.array()).all());
  CHECK((f.mean.array() <= f.upper.array()).all());
}

TEST_CASE("forecast variance adds the documented terms") {
  const SmoothedBundle sb = japan_style();
  for (ModelKind kind : kAllModels) {
    const FittedModel m = fit_model(kind, sb.surfaces, config_with(0.2));
    const ScoreForecasts sf = forecast_scores(m, 7);
    const auto fc = forecast_model(m, 7, sb.residuals, 0.05, sf);
    for (std::size_t i = 0; i < 2; ++i) {
      Eigen::MatrixXd var = Eigen::MatrixXd::Zero(7, static_cast<Eigen::Index>(m.ages.size()));
      for (std::size_t c = 0; c < m.components.size(); ++c) {
        var += sf.per_component[c].variance * m.components[c].basis[i].array().square().matrix().transpose();
      }
      Eigen::VectorXd tau2 = Eigen::VectorXd::Zero(var.cols());
      for (Eigen::Index t = 0; t < m.weights.size(); ++t) {
        tau2 += (m.weights.weights(t) * sb.residuals[i].sigma.row(t).transpose()).array().square().matrix();
      }
      var.rowwise() += (tau2 + Eigen::VectorXd(sb.residuals[i].sigma_avg.array().square())).transpose();
      CHECK(max_abs(fc[i].variance - var) < 1e-12);
      CHECK((fc[i].variance.array() >= 0.0).all());
    }
  }
}

TEST_CASE("forecaster argument errors") {
  const SmoothedBundle sb = japan_style();
  CHECK_THROWS_AS(fit_wmfpca(sb.surfaces, 1.2, ModelConfig{}), Error);
  CHECK_THROWS_AS(fit_model(ModelKind::Coherent, sb.surfaces, ModelConfig{}), Error);
  SurfaceBundle one;
  one.surfaces = {sb.surfaces.surfaces[0]};
  CHECK_THROWS_AS(fit_coherent(one, 0.2, ModelConfig{}), Error);
  CHECK_THROWS_AS(fit_product_ratio(one, ModelConfig{}), Error);
  const FittedModel m = fit_independent(sb.surfaces, ModelConfig{});
  CHECK_THROWS_AS(forecast_model(m, 0), Error);
  CHECK_THROWS_AS(forecast_model(m, 3, {}, 1.5), Error);
  CHECK_THROWS_AS(forecast_model(m, 3, {sb.residuals[0]}), Error);
}
