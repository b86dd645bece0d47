#include "mfpca/synthetic.hpp"

#include <cmath>
#include <random>

#include "mfpca/error.hpp"

namespace mfpca {

void SyntheticConfig::validate() const {
  if (last_year - first_year < 1) {
    throw Error(ErrorCode::ConfigError, "synthetic", "need at least two years");
  }
  if (max_age < 1 || max_age > 100) {
    throw Error(ErrorCode::ConfigError, "synthetic", "max_age must lie in 1..100");
  }
  if (!(std::abs(deviation_ar) < 1.0)) {
    throw Error(ErrorCode::ConfigError, "synthetic", "deviation_ar must lie in (-1, 1)");
  }
  if (index_sd < 0 || deviation_sd < 0 || noise_sd < 0) {
    throw Error(ErrorCode::ConfigError, "synthetic", "standard deviations must be non-negative");
  }
}

SurfaceBundle simulate_two_sex(const SyntheticConfig& config) {
  config.validate();
  const int T = config.last_year - config.first_year + 1;
  const int J = config.max_age + 1;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd a(J), b(J), gap(J), bdev(J);
  for (int x = 0; x < J; ++x) {
    const double age = x;
    // Gompertz adult slope, infant spike and an accident hump.
    a(x) = -9.5 + 0.085 * age + 4.5 * std::exp(-age / 1.5) +
           0.6 * std::exp(-0.5 * std::pow((age - 21.0) / 5.0, 2));
    b(x) = (1.6 - 0.012 * age) / J;
    gap(x) = config.male_excess * std::exp(-0.5 * std::pow((age - 60.0) / 25.0, 2)) +
             0.15 * std::exp(-0.5 * std::pow((age - 21.0) / 6.0, 2));
    bdev(x) = 0.05 * std::sin(age / 100.0 * 3.14159265358979);
  }

  Eigen::VectorXd k(T), g(T);
  double kt = 0.0;
  double gt = 0.0;
  for (int t = 0; t < T; ++t) {
    kt += config.drift + config.index_sd * normal(rng);
    gt = config.deviation_ar * gt + config.deviation_sd * normal(rng);
    k(t) = kt;
    g(t) = gt;
  }

  std::vector<int> ages(J), years(T);
  for (int x = 0; x < J; ++x) ages[x] = x;
  for (int t = 0; t < T; ++t) years[t] = config.first_year + t;

  SurfaceBundle bundle;
  for (int sex = 0; sex < 2; ++sex) {
    MortalitySurface s;
    s.population_id = config.country + (sex == 0 ? "_male" : "_female");
    s.ages = ages;
    s.years = years;
    s.kind = SurfaceKind::Observed;
    s.log_rates.resize(T, J);
    const double sign = sex == 0 ? 0.5 : -0.5;
    for (int t = 0; t < T; ++t) {
      for (int x = 0; x < J; ++x) {
        double v = a(x) + b(x) * k(t) + sign * (gap(x) + bdev(x) * g(t));
        if (sex == 0) v += config.divergence * t * (0.5 + 0.5 * b(x) * J / 1.6);
        s.log_rates(t, x) = v + config.noise_sd * normal(rng);
      }
    }
    bundle.surfaces.push_back(std::move(s));
  }
  return bundle;
}

}  // namespace mfpca
