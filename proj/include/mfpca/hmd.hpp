#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mfpca/surface.hpp"

namespace mfpca {

inline constexpr int kDefaultMaxAge = 100;

/// Parses a Human Mortality Database period death-rate table (Mx_1x1 layout:
/// a title line, a `Year Age Female Male Total` header, then one row per
/// year and single age). Returns female, male and total surfaces restricted
/// to ages 0..max_age, holding natural-log rates.
///
/// Missing cells (".") and zero rates are kept as NaN sentinels; run
/// impute_missing() before modelling. Population ids are
/// `<country>_female` etc., where the country is taken from `country` when
/// given and otherwise from the title line up to its first comma.
SurfaceBundle parse_hmd_rates(std::string_view raw_text, int max_age = kDefaultMaxAge,
                              std::string country = {});

/// Replaces NaN/-inf sentinels by linear interpolation along age within the
/// same year; leading or trailing gaps copy the nearest finite neighbour.
/// Throws AllMissingYear when a year has no finite entry at all.
MortalitySurface impute_missing(const MortalitySurface& surface);

/// parse_hmd_rates followed by impute_missing on every surface.
SurfaceBundle load_hmd_file(const std::filesystem::path& path, int max_age = kDefaultMaxAge,
                            std::string country = {});

// Canonical long-format CSV: header `year,age,log_rate`, rows ordered by
// year then age, 17 significant digits.
void write_surface_csv(const MortalitySurface& surface, const std::filesystem::path& path);
MortalitySurface read_surface_csv(const std::filesystem::path& path,
                                  SurfaceKind kind = SurfaceKind::Observed);

// Same layout for an arbitrary year-by-age matrix under a custom value column.
void write_grid_csv(const std::vector<int>& years, const std::vector<int>& ages,
                    const Eigen::MatrixXd& values, std::string_view value_column,
                    const std::filesystem::path& path);

struct GridCsv {
  std::vector<int> years;
  std::vector<int> ages;
  Eigen::MatrixXd values;
};
GridCsv read_grid_csv(const std::filesystem::path& path, std::string_view value_column);

}  // namespace mfpca
