#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mfpca {

enum class SurfaceKind { Observed, Smoothed };

std::string_view to_string(SurfaceKind kind);

// One subpopulation's age-by-year grid of natural-log central death rates.
// Rows are years, columns are ages.
struct MortalitySurface {
  std::string population_id;
  std::vector<int> ages;
  std::vector<int> years;
  Eigen::MatrixXd log_rates;
  SurfaceKind kind = SurfaceKind::Observed;

  Eigen::Index num_years() const { return log_rates.rows(); }
  Eigen::Index num_ages() const { return log_rates.cols(); }

  // Row index of a calendar year, or -1 when the year is not on the grid.
  Eigen::Index year_index(int year) const;

  // Copy restricted to the inclusive calendar-year range [first, last].
  MortalitySurface slice_years(int first, int last) const;
};

// Ordered set of aligned subpopulation surfaces (same ages, same years).
struct SurfaceBundle {
  std::vector<MortalitySurface> surfaces;

  std::size_t size() const { return surfaces.size(); }
  bool empty() const { return surfaces.empty(); }
  const std::vector<int>& ages() const;
  const std::vector<int>& years() const;

  const MortalitySurface& at(std::string_view population_id) const;
  SurfaceBundle slice_years(int first, int last) const;
  SurfaceBundle select(const std::vector<std::string>& population_ids) const;
};

// Throws Error(SchemaMismatch / NonFiniteInput / NonContiguousYears) when the
// surface breaks a grid invariant. `require_finite` is off for freshly parsed
// surfaces that may still carry missing-value sentinels.
void validate_surface(const MortalitySurface& surface, bool require_finite = true);

// Checks alignment and unique population ids across the bundle.
void validate_bundle(const SurfaceBundle& bundle, bool require_finite = true);

}  // namespace mfpca
