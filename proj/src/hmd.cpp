#include "mfpca/hmd.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "mfpca/error.hpp"

namespace mfpca {

namespace {

constexpr const char* kModule = "hmd_ingest";
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_char(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string sanitize_label(std::string_view s) {
  std::string out;
  for (char c : trim(s)) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') {
      out.push_back(c);
    } else if (!out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::string row_context(std::size_t line_no) { return "line " + std::to_string(line_no); }

}  // namespace

SurfaceBundle parse_hmd_rates(std::string_view raw_text, int max_age, std::string country) {
  if (max_age < 1) {
    throw Error(ErrorCode::InvalidArgument, kModule, "max_age must be >= 1");
  }
  static const std::vector<std::string> kHeader = {"Year", "Age", "Female", "Male", "Total"};

  std::istringstream in{std::string(raw_text)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::string title;

  // year -> age -> (female, male, total)
  std::map<int, std::map<int, std::array<double, 3>>> cells;
  std::vector<int> year_order;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (!header_seen) {
      if (tokens.front() == "Year") {
        if (tokens.size() != kHeader.size() ||
            !std::equal(tokens.begin(), tokens.end(), kHeader.begin())) {
          throw Error(ErrorCode::MalformedRow, kModule,
                      row_context(line_no) + ": expected header 'Year Age Female Male Total'");
        }
        header_seen = true;
      } else if (title.empty()) {
        title = trim(line);
      } else {
        throw Error(ErrorCode::MalformedRow, kModule,
                    row_context(line_no) + ": data before the column header");
      }
      continue;
    }
    if (tokens.size() != kHeader.size()) {
      throw Error(ErrorCode::MalformedRow, kModule,
                  row_context(line_no) + ": expected 5 columns, found " +
                      std::to_string(tokens.size()));
    }
    int year = 0;
    if (!parse_number(tokens[0], year)) {
      throw Error(ErrorCode::MalformedRow, kModule, row_context(line_no) + ": bad year");
    }
    std::string_view age_token = tokens[1];
    if (!age_token.empty() && age_token.back() == '+') age_token.remove_suffix(1);
    int age = 0;
    if (!parse_number(age_token, age) || age < 0) {
      throw Error(ErrorCode::MalformedRow, kModule, row_context(line_no) + ": bad age");
    }
    std::array<double, 3> values{};
    for (int k = 0; k < 3; ++k) {
      std::string_view tok = tokens[2 + k];
      if (tok == ".") {
        values[k] = kMissing;
        continue;
      }
      double v = 0.0;
      if (!parse_number(tok, v) || !std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCode::MalformedRow, kModule,
                    row_context(line_no) + ": bad rate '" + std::string(tok) + "'");
      }
      values[k] = v > 0.0 ? std::log(v) : kMissing;
    }
    if (year_order.empty() || year_order.back() != year) {
      if (cells.count(year)) {
        throw Error(ErrorCode::NonContiguousYears, kModule,
                    row_context(line_no) + ": year " + std::to_string(year) + " repeated");
      }
      year_order.push_back(year);
    }
    if (age > max_age) continue;
    if (!cells[year].emplace(age, values).second) {
      throw Error(ErrorCode::MalformedRow, kModule,
                  row_context(line_no) + ": duplicate age " + std::to_string(age));
    }
  }

  if (year_order.empty()) {
    throw Error(ErrorCode::EmptyInput, kModule, "no data rows");
  }
  for (std::size_t i = 1; i < year_order.size(); ++i) {
    if (year_order[i] != year_order[i - 1] + 1) {
      throw Error(ErrorCode::NonContiguousYears, kModule,
                  "year " + std::to_string(year_order[i]) + " follows " +
                      std::to_string(year_order[i - 1]));
    }
  }

  // Ages present in the first year define the grid; it must start at 0.
  const auto& first_year = cells[year_order.front()];
  if (first_year.empty() || first_year.begin()->first != 0) {
    throw Error(ErrorCode::MalformedRow, kModule, "age grid must start at 0");
  }
  const int top_age = first_year.rbegin()->first;
  std::vector<int> ages;
  for (int a = 0; a <= top_age; ++a) ages.push_back(a);

  const Eigen::Index T = static_cast<Eigen::Index>(year_order.size());
  const Eigen::Index J = static_cast<Eigen::Index>(ages.size());
  std::array<Eigen::MatrixXd, 3> grids;
  for (auto& g : grids) g.resize(T, J);
  for (Eigen::Index t = 0; t < T; ++t) {
    const int year = year_order[static_cast<std::size_t>(t)];
    const auto& row = cells[year];
    if (static_cast<Eigen::Index>(row.size()) != J) {
      throw Error(ErrorCode::MalformedRow, kModule,
                  "year " + std::to_string(year) + " does not cover ages 0.." +
                      std::to_string(top_age));
    }
    Eigen::Index j = 0;
    for (const auto& [age, v] : row) {
      if (age != ages[static_cast<std::size_t>(j)]) {
        throw Error(ErrorCode::MalformedRow, kModule,
                    "year " + std::to_string(year) + " has a gap in ages");
      }
      for (int k = 0; k < 3; ++k) grids[k](t, j) = v[k];
      ++j;
    }
  }

  std::string label = sanitize_label(country.empty() ? title.substr(0, title.find(',')) : country);
  if (label.empty()) label = "population";
  static const std::array<const char*, 3> kSex = {"female", "male", "total"};

  SurfaceBundle bundle;
  for (int k = 0; k < 3; ++k) {
    MortalitySurface s;
    s.population_id = label + "_" + kSex[k];
    s.ages = ages;
    s.years = year_order;
    s.log_rates = std::move(grids[k]);
    s.kind = SurfaceKind::Observed;
    bundle.surfaces.push_back(std::move(s));
  }
  return bundle;
}

MortalitySurface impute_missing(const MortalitySurface& surface) {
  MortalitySurface out = surface;
  const Eigen::Index J = out.log_rates.cols();
  for (Eigen::Index t = 0; t < out.log_rates.rows(); ++t) {
    auto row = out.log_rates.row(t);
    std::vector<Eigen::Index> finite;
    for (Eigen::Index j = 0; j < J; ++j) {
      if (std::isfinite(row(j))) finite.push_back(j);
    }
    if (finite.empty()) {
      const std::string year = t < static_cast<Eigen::Index>(out.years.size())
                                   ? std::to_string(out.years[static_cast<std::size_t>(t)])
                                   : std::to_string(t);
      throw Error(ErrorCode::AllMissingYear, kModule,
                  "year " + year + " of " + out.population_id + " has no finite rate");
    }
    for (Eigen::Index j = 0; j < finite.front(); ++j) row(j) = row(finite.front());
    for (Eigen::Index j = finite.back() + 1; j < J; ++j) row(j) = row(finite.back());
    for (std::size_t k = 1; k < finite.size(); ++k) {
      const Eigen::Index a = finite[k - 1], b = finite[k];
      for (Eigen::Index j = a + 1; j < b; ++j) {
        const double u = static_cast<double>(j - a) / static_cast<double>(b - a);
        row(j) = (1.0 - u) * row(a) + u * row(b);
      }
    }
  }
  return out;
}

SurfaceBundle load_hmd_file(const std::filesystem::path& path, int max_age, std::string country) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, kModule, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  SurfaceBundle bundle = parse_hmd_rates(buf.str(), max_age, std::move(country));
  for (auto& s : bundle.surfaces) s = impute_missing(s);
  validate_bundle(bundle);
  return bundle;
}

void write_grid_csv(const std::vector<int>& years, const std::vector<int>& ages,
                    const Eigen::MatrixXd& values, std::string_view value_column,
                    const std::filesystem::path& path) {
  if (values.rows() != static_cast<Eigen::Index>(years.size()) ||
      values.cols() != static_cast<Eigen::Index>(ages.size())) {
    throw Error(ErrorCode::SchemaMismatch, kModule, "grid shape does not match its axes");
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, kModule, "cannot write " + path.string());
  out << "year,age," << value_column << '\n';
  out << std::setprecision(17);
  for (std::size_t t = 0; t < years.size(); ++t) {
    for (std::size_t j = 0; j < ages.size(); ++j) {
      out << years[t] << ',' << ages[j] << ','
          << values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoError, kModule, "failed writing " + path.string());
}

GridCsv read_grid_csv(const std::filesystem::path& path, std::string_view value_column) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, kModule, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::SchemaMismatch, kModule, path.string() + " is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string expected = "year,age," + std::string(value_column);
  if (line != expected) {
    throw Error(ErrorCode::SchemaMismatch, kModule,
                path.string() + ": expected header '" + expected + "'");
  }

  GridCsv grid;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  std::size_t age_pos = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_char(line, ',');
    int year = 0, age = 0;
    double v = 0.0;
    if (fields.size() != 3 || !parse_number(fields[0], year) || !parse_number(fields[1], age) ||
        !parse_number(fields[2], v)) {
      throw Error(ErrorCode::SchemaMismatch, kModule,
                  path.string() + ": " + row_context(line_no) + " is not year,age,value");
    }
    if (rows.empty() || year != grid.years.back()) {
      if (!rows.empty()) {
        if (year != grid.years.back() + 1) {
          throw Error(ErrorCode::SchemaMismatch, kModule,
                      path.string() + ": years must be contiguous and increasing at " +
                          row_context(line_no));
        }
        if (rows.size() > 1 && age_pos != grid.ages.size()) {
          throw Error(ErrorCode::SchemaMismatch, kModule,
                      path.string() + ": incomplete age block before " + row_context(line_no));
        }
      }
      grid.years.push_back(year);
      rows.emplace_back();
      age_pos = 0;
    }
    if (rows.size() == 1) {
      if (!grid.ages.empty() && age != grid.ages.back() + 1) {
        throw Error(ErrorCode::SchemaMismatch, kModule,
                    path.string() + ": ages must be contiguous at " + row_context(line_no));
      }
      grid.ages.push_back(age);
    } else if (age_pos >= grid.ages.size() || grid.ages[age_pos] != age) {
      throw Error(ErrorCode::SchemaMismatch, kModule,
                  path.string() + ": age grid differs at " + row_context(line_no));
    }
    ++age_pos;
    rows.back().push_back(v);
  }
  if (rows.empty()) throw Error(ErrorCode::SchemaMismatch, kModule, path.string() + " has no rows");
  if (rows.back().size() != grid.ages.size()) {
    throw Error(ErrorCode::SchemaMismatch, kModule, path.string() + ": incomplete final year");
  }
  grid.values.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(grid.ages.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t j = 0; j < grid.ages.size(); ++j) {
      grid.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
    }
  }
  return grid;
}

void write_surface_csv(const MortalitySurface& surface, const std::filesystem::path& path) {
  validate_surface(surface);
  write_grid_csv(surface.years, surface.ages, surface.log_rates, "log_rate", path);
}

MortalitySurface read_surface_csv(const std::filesystem::path& path, SurfaceKind kind) {
  GridCsv grid = read_grid_csv(path, "log_rate");
  MortalitySurface s;
  std::string stem = path.stem().string();
  constexpr std::string_view kSmoothedSuffix = ".smoothed";
  if (stem.size() > kSmoothedSuffix.size() &&
      stem.compare(stem.size() - kSmoothedSuffix.size(), kSmoothedSuffix.size(),
                   kSmoothedSuffix) == 0) {
    stem.resize(stem.size() - kSmoothedSuffix.size());
  }
  s.population_id = stem;
  s.ages = std::move(grid.ages);
  s.years = std::move(grid.years);
  s.log_rates = std::move(grid.values);
  s.kind = kind;
  try {
    validate_surface(s);
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaMismatch, kModule, path.string() + ": " + e.what());
  }
  return s;
}

}  // namespace mfpca
