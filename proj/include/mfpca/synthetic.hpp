#pragma once

#include <cstdint>
#include <string>

#include "mfpca/surface.hpp"

namespace mfpca {

/// Two-sex log-mortality generator with a Lee-Carter style common trend,
/// a mean-reverting sex deviation and independent cell noise.
struct SyntheticConfig {
  int first_year = 1947;
  int last_year = 2016;
  int max_age = 100;
  double drift = -1.0;           // per-year change of the common index
  double index_sd = 0.6;         // innovation sd of the common index
  double deviation_ar = 0.6;     // AR(1) coefficient of the sex deviation index
  double deviation_sd = 0.3;
  double male_excess = 0.35;     // peak log male excess mortality
  double divergence = 0.0;       // extra per-year slope on the male surface
  double noise_sd = 0.03;
  std::uint64_t seed = 20240101;
  std::string country = "synthetic";

  void validate() const;
};

/// Returns an Observed bundle ordered (male, female).
SurfaceBundle simulate_two_sex(const SyntheticConfig& config);

}  // namespace mfpca
