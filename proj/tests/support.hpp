#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mfpca/surface.hpp"

namespace testsupport {

// Small hand-rolled generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(sd);
    return m;
  }

  Eigen::VectorXd vector(Eigen::Index n, double sd = 1.0) { return matrix(n, 1, sd); }

  // Random walk of length n with the given drift.
  Eigen::VectorXd random_walk(Eigen::Index n, double drift, double sd) {
    Eigen::VectorXd x(n);
    double v = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) x(t) = (v += drift + normal(sd));
    return x;
  }

  Eigen::VectorXd ar1(Eigen::Index n, double phi, double sd, Eigen::Index burn = 200) {
    Eigen::VectorXd x(n);
    double v = 0.0;
    for (Eigen::Index t = -burn; t < n; ++t) {
      v = phi * v + normal(sd);
      if (t >= 0) x(t) = v;
    }
    return x;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline mfpca::MortalitySurface make_surface(std::string id, const Eigen::MatrixXd& log_rates,
                                            int first_year = 1950,
                                            mfpca::SurfaceKind kind = mfpca::SurfaceKind::Smoothed) {
  mfpca::MortalitySurface s;
  s.population_id = std::move(id);
  s.log_rates = log_rates;
  s.kind = kind;
  for (Eigen::Index t = 0; t < log_rates.rows(); ++t) s.years.push_back(first_year + static_cast<int>(t));
  for (Eigen::Index j = 0; j < log_rates.cols(); ++j) s.ages.push_back(static_cast<int>(j));
  return s;
}

inline mfpca::SurfaceBundle make_bundle(const std::vector<Eigen::MatrixXd>& curves, int first_year = 1950,
                                        mfpca::SurfaceKind kind = mfpca::SurfaceKind::Smoothed) {
  mfpca::SurfaceBundle b;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    b.surfaces.push_back(make_surface("pop" + std::to_string(i), curves[i], first_year, kind));
  }
  return b;
}

// Log-mortality-like curves: smooth age profile + trend * loading + noise.
inline Eigen::MatrixXd trending_curves(Gen& g, Eigen::Index T, Eigen::Index J, double slope, double noise) {
  Eigen::MatrixXd y(T, J);
  const Eigen::VectorXd k = g.random_walk(T, slope, 0.3);
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index j = 0; j < J; ++j) {
      const double x = static_cast<double>(j) / static_cast<double>(J);
      y(t, j) = -8.0 + 6.0 * x + k(t) * (1.0 - 0.5 * x) * 0.1 + g.normal(noise);
    }
  return y;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mfpca_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Distance between two matrices up to the sign of each row.
inline double rowwise_sign_free_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double plus = (a.row(r) - b.row(r)).cwiseAbs().maxCoeff();
    const double minus = (a.row(r) + b.row(r)).cwiseAbs().maxCoeff();
    worst = std::max(worst, std::min(plus, minus));
  }
  return worst;
}

}  // namespace testsupport
