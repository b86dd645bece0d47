#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mfpca/error.hpp"
#include "mfpca/evaluation.hpp"
#include "support.hpp"

using namespace mfpca;
using testsupport::Gen;

namespace {

WindowForecaster truth_plus(const SurfaceBundle& observed, double offset) {
  return [&observed, offset](int end, int h) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& s : observed.surfaces) {
      out.push_back((s.log_rates.row(s.year_index(end + h)).array() + offset).matrix().transpose());
    }
    return out;
  };
}

SurfaceBundle two_trending(std::uint64_t seed, Eigen::Index T = 40, Eigen::Index J = 10) {
  Gen g(seed);
  return testsupport::make_bundle({testsupport::trending_curves(g, T, J, -1.0, 0.05),
                                   testsupport::trending_curves(g, T, J, -1.2, 0.05)});
}

// Age pattern of improvement switches after `switch_at` years.
SurfaceBundle regime_change(std::uint64_t seed, Eigen::Index T, Eigen::Index switch_at) {
  Gen g(seed);
  const Eigen::Index J = 12;
  std::vector<Eigen::MatrixXd> curves;
  for (int pop = 0; pop < 2; ++pop) {
    Eigen::MatrixXd y(T, J);
    double k = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      k += -1.0 + g.normal(0.2);
      for (Eigen::Index j = 0; j < J; ++j) {
        const double a = static_cast<double>(j) / static_cast<double>(J - 1);
        const double loading = t < switch_at ? 0.1 * (1.0 - a) : 0.1 * a;
        y(t, j) = -8.0 + 6.0 * a + loading * k + 0.2 * pop + g.normal(0.01);
      }
    }
    curves.push_back(y);
  }
  return testsupport::make_bundle(curves);
}

}  // namespace

TEST_CASE("rolling schedule tiles the last years") {
  const SurfaceBundle b = two_trending(1);
  for (int h : {1, 5, 20}) {
    const auto ends = rolling_train_ends(b, h, 10);
    REQUIRE(ends.size() == 10);
    CHECK(ends.back() + h == b.years().back());
    CHECK(ends.front() + h == b.years().back() - 9);
    for (std::size_t w = 1; w < ends.size(); ++w) CHECK(ends[w] == ends[w - 1] + 1);
  }
}

TEST_CASE("spans too short for the windows are rejected") {
  const SurfaceBundle b = two_trending(2, 19);
  try {
    rolling_train_ends(b, 1, 10);
    FAIL("expected InsufficientSpan");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientSpan);
  }
  CHECK(rolling_train_ends(b, 1, 9).size() == 9);
  CHECK_THROWS_AS(rolling_train_ends(b, 0, 5), Error);
}

TEST_CASE("perfect and offset forecasters") {
  const SurfaceBundle b = two_trending(3);
  const EvalReport perfect = rolling_rmse(b, 3, 10, truth_plus(b, 0.0));
  CHECK(perfect.avg_rmse == 0.0);
  const EvalReport off = rolling_rmse(b, 3, 10, truth_plus(b, 0.3));
  CHECK(off.avg_rmse == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(off.rmse(0) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("rmse grows with the forecast error") {
  const SurfaceBundle b = two_trending(4);
  Gen g(99);
  const Eigen::MatrixXd noise = g.matrix(200, 10);
  auto scaled = [&](double c) -> WindowForecaster {
    return [&b, &noise, c](int end, int h) {
      std::vector<Eigen::VectorXd> out;
      for (const auto& s : b.surfaces) {
        out.push_back(s.log_rates.row(s.year_index(end + h)).transpose() + c * noise.row(end - 1950).transpose());
      }
      return out;
    };
  };
  double prev = -1.0;
  for (double c : {0.0, 0.1, 0.2, 0.5, 1.0, 3.0}) {
    const double v = rolling_rmse(b, 2, 8, scaled(c)).avg_rmse;
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("population order does not change the average rmse") {
  const SurfaceBundle b = two_trending(5);
  SurfaceBundle swapped;
  swapped.surfaces = {b.surfaces[1], b.surfaces[0]};
  for (ModelKind kind : {ModelKind::Independent, ModelKind::Wmfpca, ModelKind::Coherent, ModelKind::ProductRatio}) {
    ModelConfig cfg;
    cfg.kappa = 0.3;
    const EvalReport a = rolling_rmse(b, b, kind, 2, 10, cfg);
    const EvalReport s = rolling_rmse(swapped, swapped, kind, 2, 10, cfg);
    CHECK(a.avg_rmse == doctest::Approx(s.avg_rmse).epsilon(1e-10));
    CHECK(a.rmse(0) == doctest::Approx(s.rmse(1)).epsilon(1e-10));
  }
}

TEST_CASE("kappa tuning") {
  const SurfaceBundle b = two_trending(6, 30);
  ModelConfig cfg;
  SUBCASE("single-value grid") {
    const KappaTuning t = tune_kappa(b, b, ModelKind::Coherent, 1, 5, {0.4}, cfg);
    CHECK(t.kappa == 0.4);
  }
  SUBCASE("picks the grid minimum") {
    const std::vector<double> grid = {0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95};
    const KappaTuning t = tune_kappa(b, b, ModelKind::Wmfpca, 1, 5, grid, cfg);
    REQUIRE(t.objective.size() == grid.size());
    const double best = *std::min_element(t.objective.begin(), t.objective.end());
    ModelConfig check = cfg;
    check.kappa = t.kappa;
    const double recomputed = rolling_rmse(b, b, ModelKind::Wmfpca, 1, 5, check).avg_rmse;
    CHECK(recomputed == doctest::Approx(best).epsilon(1e-12));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      ModelConfig c = cfg;
      c.kappa = grid[i];
      CHECK(rolling_rmse(b, b, ModelKind::Wmfpca, 1, 5, c).avg_rmse >= best - 1e-12);
    }
  }
  SUBCASE("ties go to the smaller kappa") {
    // the product-ratio model ignores kappa, so every grid value ties
    const KappaTuning t = tune_kappa(b, b, ModelKind::ProductRatio, 1, 5, {0.7, 0.3, 0.5}, cfg);
    CHECK(t.kappa == 0.3);
  }
  CHECK_THROWS_AS(tune_kappa(b, b, ModelKind::Coherent, 1, 5, {}, cfg), Error);
}

TEST_CASE("a recent regime change moves kappa away from the smallest value") {
  for (std::uint64_t seed : {7, 8, 9}) {
    const SurfaceBundle b = regime_change(seed, 50, 32);
    const KappaTuning t = tune_kappa(b, b, ModelKind::Wmfpca, 1, 6, default_kappa_grid(), ModelConfig{});
    const double best = *std::min_element(t.objective.begin(), t.objective.end());
    CHECK(t.kappa >= 0.25);
    CHECK(t.objective.front() > 5.0 * best);
  }
}

TEST_CASE("evaluate_model reports the tuned kappa") {
  const SurfaceBundle b = two_trending(8, 36);
  const EvalReport r = evaluate_model(b, b, ModelKind::Coherent, 1, 5, ModelConfig{}, {0.1, 0.6});
  REQUIRE(r.kappa.has_value());
  CHECK((*r.kappa == 0.1 || *r.kappa == 0.6));
  const EvalReport ind = evaluate_model(b, b, ModelKind::Independent, 1, 5, ModelConfig{});
  CHECK_FALSE(ind.kappa.has_value());
  CHECK(std::isfinite(ind.avg_rmse));
  CHECK(ind.avg_rmse == doctest::Approx(ind.rmse.mean()));
}

TEST_CASE("eval csv appends rows under one header") {
  const auto dir = testsupport::scratch_dir("evaluation");
  const std::string path = (dir / "eval.csv").string();
  EvalReport r;
  r.country = "synthetic";
  r.model = "coherent";
  r.h = 5;
  r.population_ids = {"a", "b"};
  r.rmse = Eigen::Vector2d(0.1, 0.3);
  r.avg_rmse = 0.2;
  r.windows = 10;
  r.kappa = 0.25;
  append_eval_csv(r, path);
  r.kappa.reset();
  r.model = "independent";
  append_eval_csv(r, path);

  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == eval_csv_header());
  CHECK(lines[0] == "country,model,h,pop,rmse,avg_rmse,windows,kappa");
  CHECK(lines[1].rfind("synthetic,coherent,5,a,0.1", 0) == 0);
  CHECK(lines[2].substr(lines[2].size() - 5) == ",0.25");
  CHECK(lines[4].back() == ',');
}
