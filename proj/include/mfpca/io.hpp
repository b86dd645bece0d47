#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mfpca/forecasters.hpp"
#include "mfpca/mfpca.hpp"
#include "mfpca/smoothing.hpp"
#include "mfpca/ufpca.hpp"

namespace mfpca {

// CSV layouts:
//   mean.csv            age,mean
//   eigenfunctions.csv  age,phi1..phiN
//   scores.csv          year,score1..scoreN
//   eigenvalues.csv     component,eigenvalue,var_explained
void write_fpca_fit(const FpcaFit& fit, const std::vector<int>& years, const std::vector<int>& ages,
                    const std::filesystem::path& dir);

// One subdirectory per population holding its univariate fit plus
// psi.csv (age,psi1..psiM); joint scores.csv and eigenvalues.csv at the top.
void write_mfpca_fit(const MfpcaFit& fit, const std::vector<std::string>& population_ids,
                     const std::vector<int>& years, const std::vector<int>& ages,
                     const std::filesystem::path& dir);

/// Writes `<dir>/<model name>/`: base.csv, components.csv (label, mode and
/// ARIMA spec per component), component_scores.csv, basis_<pop>.csv, weights.csv
/// and the model-specific decomposition in subdirectories.
std::filesystem::path write_model(const FittedModel& model, const std::filesystem::path& dir);

/// year,age,mean,variance,lower,upper
void write_forecast_csv(const ForecastSurface& forecast, const std::filesystem::path& path);

void write_sigma_csv(const MortalitySurface& surface, const ResidualField& residuals,
                     const std::filesystem::path& path);
ResidualField read_sigma_csv(const std::filesystem::path& path);

}  // namespace mfpca
