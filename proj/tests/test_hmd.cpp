#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "mfpca/error.hpp"
#include "mfpca/hmd.hpp"
#include "support.hpp"

using namespace mfpca;

namespace {

std::string hmd_text(int first_year, int last_year, int max_age, double rate = 1.0, bool open_age = false) {
  std::ostringstream os;
  os << "Japan, Death rates (period 1x1), \tLast modified: 01 Jan 2020\n\n";
  os << "  Year          Age             Female            Male           Total\n";
  for (int y = first_year; y <= last_year; ++y) {
    for (int a = 0; a <= max_age; ++a) os << "  " << y << "  " << a << "  " << rate << "  " << rate << "  " << rate << "\n";
    if (open_age) os << "  " << y << "  110+  " << rate << "  " << rate << "  " << rate << "\n";
  }
  return os.str();
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mfpca::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("three rows of unit rates give zero log rates") {
  const SurfaceBundle b = parse_hmd_rates(hmd_text(1947, 1947, 2));
  REQUIRE(b.size() == 3);
  CHECK(b.surfaces[0].population_id == "Japan_female");
  CHECK(b.surfaces[1].population_id == "Japan_male");
  CHECK(b.surfaces[2].population_id == "Japan_total");
  for (const auto& s : b.surfaces) {
    CHECK(s.num_years() == 1);
    CHECK(s.num_ages() == 3);
    CHECK(testsupport::max_abs(s.log_rates) == 0.0);
  }
}

TEST_CASE("open age interval is dropped at max_age 100") {
  const SurfaceBundle b = parse_hmd_rates(hmd_text(1950, 1951, 105, 0.5, true), 100);
  CHECK(b.surfaces[0].num_ages() == 101);
  CHECK(b.ages().back() == 100);
  // Truncation leaves retained entries untouched.
  CHECK(b.surfaces[1].log_rates(1, 100) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
}

TEST_CASE("rate 0.01 is stored as its natural log") {
  std::string text = hmd_text(1950, 1950, 41, 0.02);
  const std::string needle = "  1950  40  0.02  0.02  0.02";
  const auto pos = text.find(needle);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, needle.size(), "  1950  40  0.01  0.02  0.02");
  const SurfaceBundle b = parse_hmd_rates(text);
  // ln(0.01) = -2 ln 10
  CHECK(b.surfaces[0].log_rates(0, 40) == doctest::Approx(-2.0 * 2.302585092994046).epsilon(1e-14));
  CHECK(b.surfaces[1].log_rates(0, 40) == doctest::Approx(std::log(0.02)));
}

TEST_CASE("parser errors") {
  CHECK(code_of([] { parse_hmd_rates("Year Age Female Male Total\n1950 0 0.1 0.1\n"); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_hmd_rates("Year Age Female Male Total Extra\n"); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_hmd_rates("Year Age Female Male Total\n1950 0 -0.1 0.1 0.1\n"); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_hmd_rates("Title\n\n"); }) == ErrorCode::EmptyInput);
  CHECK(code_of([] { parse_hmd_rates("Year Age Female Male Total\n"); }) == ErrorCode::EmptyInput);
  CHECK(code_of([] {
          parse_hmd_rates("Year Age Female Male Total\n1950 0 .1 .1 .1\n1952 0 .1 .1 .1\n");
        }) == ErrorCode::NonContiguousYears);
  CHECK(code_of([] {
          parse_hmd_rates("Year Age Female Male Total\n1950 0 .1 .1 .1\n1951 0 .1 .1 .1\n1950 1 .1 .1 .1\n");
        }) == ErrorCode::NonContiguousYears);
}

TEST_CASE("missing and zero rates become gaps that imputation fills") {
  const std::string text =
      "Year Age Female Male Total\n"
      "2000 0 . 0.1 0.1\n"
      "2000 1 0.2 0 0.1\n"
      "2000 2 0.3 0.3 0.1\n";
  const SurfaceBundle b = parse_hmd_rates(text);
  CHECK(std::isnan(b.surfaces[0].log_rates(0, 0)));
  CHECK(std::isnan(b.surfaces[1].log_rates(0, 1)));
  const MortalitySurface f = impute_missing(b.surfaces[0]);
  CHECK(f.log_rates(0, 0) == doctest::Approx(std::log(0.2)));
  const MortalitySurface m = impute_missing(b.surfaces[1]);
  CHECK(m.log_rates(0, 1) == doctest::Approx(0.5 * (std::log(0.1) + std::log(0.3))));
}

TEST_CASE("imputation examples") {
  Eigen::MatrixXd row = Eigen::MatrixXd::Constant(1, 60, -4.0);
  row(0, 49) = -4.0;
  row(0, 50) = std::numeric_limits<double>::quiet_NaN();
  row(0, 51) = -2.0;
  row(0, 0) = std::numeric_limits<double>::quiet_NaN();
  row(0, 1) = -5.2;
  const MortalitySurface out = impute_missing(testsupport::make_surface("x", row, 2000, SurfaceKind::Observed));
  CHECK(out.log_rates(0, 50) == doctest::Approx(-3.0));
  CHECK(out.log_rates(0, 0) == doctest::Approx(-5.2));

  const Eigen::MatrixXd clean = Eigen::MatrixXd::Constant(2, 4, -1.5);
  const auto s = testsupport::make_surface("y", clean);
  CHECK(impute_missing(s).log_rates == clean);

  Eigen::MatrixXd empty = Eigen::MatrixXd::Constant(2, 3, std::numeric_limits<double>::quiet_NaN());
  empty.row(0).setConstant(-1.0);
  CHECK(code_of([&] { impute_missing(testsupport::make_surface("z", empty)); }) == ErrorCode::AllMissingYear);
}

TEST_CASE("parsed rates are positive after exponentiation") {
  testsupport::Gen g(7);
  std::ostringstream os;
  os << "Year Age Female Male Total\n";
  for (int y = 1990; y < 1995; ++y)
    for (int a = 0; a <= 10; ++a)
      os << y << ' ' << a << ' ' << g.uniform(1e-5, 0.5) << ' ' << g.uniform(1e-5, 0.5) << ' ' << g.uniform(1e-5, 0.5) << '\n';
  for (const auto& s : parse_hmd_rates(os.str(), 100, "x").surfaces) {
    CHECK((s.log_rates.array().exp() > 0.0).all());
    CHECK(s.population_id.rfind("x_", 0) == 0);
  }
}

TEST_CASE("surface csv round trip and schema") {
  const auto dir = testsupport::scratch_dir("hmd_csv");
  testsupport::Gen g(3);
  const MortalitySurface s = testsupport::make_surface("pop", g.matrix(2, 3), 1990, SurfaceKind::Observed);
  write_surface_csv(s, dir / "pop.csv");

  std::ifstream in(dir / "pop.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "year,age,log_rate");
  int rows = 0;
  while (std::getline(in, line)) rows += !line.empty();
  CHECK(rows == 6);

  const MortalitySurface back = read_surface_csv(dir / "pop.csv");
  CHECK(back.population_id == "pop");
  CHECK(back.years == s.years);
  CHECK(back.ages == s.ages);
  CHECK(back.log_rates == s.log_rates);

  // parse -> write -> read is idempotent
  const SurfaceBundle parsed = load_hmd_file([&] {
    std::ofstream f(dir / "Mx_1x1.txt");
    f << hmd_text(1960, 1962, 5, 0.037);
    return dir / "Mx_1x1.txt";
  }());
  write_surface_csv(parsed.surfaces[1], dir / "m.csv");
  CHECK(read_surface_csv(dir / "m.csv").log_rates == parsed.surfaces[1].log_rates);

  std::ofstream bad(dir / "shuffled.csv");
  bad << "year,age,log_rate\n1991,0,1\n1991,1,1\n1990,0,1\n1990,1,1\n";
  bad.close();
  CHECK(code_of([&] { read_surface_csv(dir / "shuffled.csv"); }) == ErrorCode::SchemaMismatch);
  CHECK(code_of([&] { read_surface_csv(dir / "absent.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("surface validation") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 3);
  auto s = testsupport::make_surface("a", m);
  s.years = {1990, 1992};
  CHECK(code_of([&] { validate_surface(s); }) == ErrorCode::NonContiguousYears);
  s = testsupport::make_surface("a", m);
  s.log_rates(1, 1) = std::numeric_limits<double>::infinity();
  CHECK(code_of([&] { validate_surface(s); }) == ErrorCode::NonFiniteInput);
  SurfaceBundle b = testsupport::make_bundle({m, Eigen::MatrixXd::Zero(3, 3)});
  CHECK(code_of([&] { validate_bundle(b); }) == ErrorCode::ShapeMismatch);
}
