#include "mfpca/surface.hpp"

#include <algorithm>
#include <set>

#include "mfpca/error.hpp"

namespace mfpca {

namespace {

constexpr const char* kModule = "hmd_ingest";

bool contiguous_increasing(const std::vector<int>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] != v[i - 1] + 1) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(SurfaceKind kind) {
  return kind == SurfaceKind::Observed ? "observed" : "smoothed";
}

Eigen::Index MortalitySurface::year_index(int year) const {
  if (years.empty() || year < years.front() || year > years.back()) return -1;
  return static_cast<Eigen::Index>(year - years.front());
}

MortalitySurface MortalitySurface::slice_years(int first, int last) const {
  const Eigen::Index i0 = year_index(first);
  const Eigen::Index i1 = year_index(last);
  if (i0 < 0 || i1 < 0 || i1 < i0) {
    throw Error(ErrorCode::IndexOutOfRange, kModule,
                "year range " + std::to_string(first) + "-" + std::to_string(last) +
                    " outside surface " + population_id);
  }
  MortalitySurface out;
  out.population_id = population_id;
  out.ages = ages;
  out.years.assign(years.begin() + i0, years.begin() + i1 + 1);
  out.log_rates = log_rates.middleRows(i0, i1 - i0 + 1);
  out.kind = kind;
  return out;
}

const std::vector<int>& SurfaceBundle::ages() const {
  if (surfaces.empty()) throw Error(ErrorCode::EmptyBundle, kModule, "bundle has no surfaces");
  return surfaces.front().ages;
}

const std::vector<int>& SurfaceBundle::years() const {
  if (surfaces.empty()) throw Error(ErrorCode::EmptyBundle, kModule, "bundle has no surfaces");
  return surfaces.front().years;
}

const MortalitySurface& SurfaceBundle::at(std::string_view population_id) const {
  for (const auto& s : surfaces) {
    if (s.population_id == population_id) return s;
  }
  throw Error(ErrorCode::IndexOutOfRange, kModule,
              "no population '" + std::string(population_id) + "'");
}

SurfaceBundle SurfaceBundle::slice_years(int first, int last) const {
  SurfaceBundle out;
  out.surfaces.reserve(surfaces.size());
  for (const auto& s : surfaces) out.surfaces.push_back(s.slice_years(first, last));
  return out;
}

SurfaceBundle SurfaceBundle::select(const std::vector<std::string>& population_ids) const {
  SurfaceBundle out;
  for (const auto& id : population_ids) out.surfaces.push_back(at(id));
  return out;
}

void validate_surface(const MortalitySurface& s, bool require_finite) {
  if (s.ages.empty() || s.years.empty()) {
    throw Error(ErrorCode::EmptyInput, kModule, "surface " + s.population_id + " is empty");
  }
  if (!contiguous_increasing(s.ages) || s.ages.back() > 100 || s.ages.front() < 0) {
    throw Error(ErrorCode::SchemaMismatch, kModule,
                "ages of " + s.population_id + " must be contiguous within 0..100");
  }
  if (!contiguous_increasing(s.years)) {
    throw Error(ErrorCode::NonContiguousYears, kModule,
                "years of " + s.population_id + " must be contiguous and increasing");
  }
  if (s.log_rates.rows() != static_cast<Eigen::Index>(s.years.size()) ||
      s.log_rates.cols() != static_cast<Eigen::Index>(s.ages.size())) {
    throw Error(ErrorCode::SchemaMismatch, kModule,
                "log_rates shape does not match the grid of " + s.population_id);
  }
  if (require_finite && !s.log_rates.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, kModule,
                "surface " + s.population_id + " has non-finite entries");
  }
}

void validate_bundle(const SurfaceBundle& bundle, bool require_finite) {
  if (bundle.empty()) throw Error(ErrorCode::EmptyBundle, kModule, "bundle has no surfaces");
  std::set<std::string> ids;
  for (const auto& s : bundle.surfaces) {
    validate_surface(s, require_finite);
    if (s.ages != bundle.ages() || s.years != bundle.years()) {
      throw Error(ErrorCode::ShapeMismatch, kModule,
                  "surface " + s.population_id + " is not aligned with " +
                      bundle.surfaces.front().population_id);
    }
    if (!ids.insert(s.population_id).second) {
      throw Error(ErrorCode::SchemaMismatch, kModule,
                  "duplicate population id " + s.population_id);
    }
  }
}

}  // namespace mfpca
