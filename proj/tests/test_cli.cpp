#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "../tools/cli.hpp"
#include "mfpca/error.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "mfpca");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = mfpca::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> files_under(const fs::path& root) {
  std::vector<std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root).string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_constant_surface(const fs::path& path, double value, int first, int last, int max_age) {
  std::ofstream out(path);
  out << "year,age,log_rate\n";
  for (int y = first; y <= last; ++y)
    for (int a = 0; a <= max_age; ++a) out << y << ',' << a << ',' << value << '\n';
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("simulate and forecast are byte-for-byte reproducible") {
  const fs::path dir = testsupport::scratch_dir("cli_repro");
  for (const char* run_name : {"a", "b"}) {
    const fs::path data = dir / run_name / "data";
    const fs::path out = dir / run_name / "out";
    REQUIRE(run({"simulate", "--out", data.string(), "--last-year", "1990", "--max-age", "40", "--seed", "17"}).code == 0);
    REQUIRE(run({"smooth", "--data", data.string(), "--out", data.string()}).code == 0);
    const Result r = run({"forecast", "--data", data.string(), "--out", out.string(), "--model",
                          "independent,wmfpca,coherent,product_ratio", "--kappa", "0.2", "--h", "5,12"});
    REQUIRE(r.code == 0);
  }
  const auto files = files_under(dir / "a");
  CHECK(files.size() > 10);
  CHECK(files == files_under(dir / "b"));
  for (const auto& f : files) {
    INFO(f);
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
}

TEST_CASE("constant surfaces forecast the constant") {
  const fs::path dir = testsupport::scratch_dir("cli_constant");
  write_constant_surface(dir / "flat_male.csv", -4.5, 1960, 1999, 40);
  write_constant_surface(dir / "flat_female.csv", -5.0, 1960, 1999, 40);
  const fs::path out = dir / "out";
  const Result r = run({"forecast", "--data", dir.string(), "--out", out.string(), "--model",
                        "independent,wmfpca,coherent,product_ratio", "--kappa", "0.3", "--h", "10"});
  INFO(r.err);
  REQUIRE(r.code == 0);
  for (const char* model : {"independent", "wmfpca", "coherent", "product_ratio"}) {
    for (auto [pop, value] : {std::pair{"flat_male", -4.5}, std::pair{"flat_female", -5.0}}) {
      std::ifstream in(out / model / (std::string("forecast_") + pop + ".csv"));
      REQUIRE(in.good());
      std::string line;
      std::getline(in, line);
      CHECK(line == "year,age,mean,variance,lower,upper");
      int rows = 0;
      while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string year, age, mean;
        std::getline(ss, year, ',');
        std::getline(ss, age, ',');
        std::getline(ss, mean, ',');
        CHECK(std::abs(std::stod(mean) - value) < 1e-6);
        ++rows;
      }
      CHECK(rows == 10 * 41);
    }
  }
}

TEST_CASE("config file values are overridden by flags") {
  const fs::path dir = testsupport::scratch_dir("cli_config");
  const fs::path data = dir / "data";
  REQUIRE(run({"simulate", "--out", data.string(), "--last-year", "1985", "--max-age", "30"}).code == 0);
  {
    std::ofstream cfg(dir / "run.ini");
    cfg << "data = " << data.string() << "\n"
        << "model = independent\n"
        << "h = 3\n"
        << "out = " << (dir / "from_config").string() << "\n";
  }
  REQUIRE(run({"forecast", "--config", (dir / "run.ini").string()}).code == 0);
  CHECK(fs::exists(dir / "from_config" / "independent" / "forecast_synthetic_male.csv"));
  const std::string text = slurp(dir / "from_config" / "independent" / "forecast_synthetic_male.csv");
  CHECK(count_lines(text) == 1 + 3 * 31);

  REQUIRE(run({"forecast", "--config", (dir / "run.ini").string(), "--h", "2", "--out", (dir / "from_flag").string()})
              .code == 0);
  const std::string flagged = slurp(dir / "from_flag" / "independent" / "forecast_synthetic_male.csv");
  CHECK(count_lines(flagged) == 1 + 2 * 31);

  {
    std::ofstream cfg(dir / "bad.ini");
    cfg << "no_such_key = 1\n";
  }
  const Result bad = run({"forecast", "--config", (dir / "bad.ini").string()});
  CHECK(bad.code == 2);
}

TEST_CASE("errors print one line and leave no outputs") {
  const fs::path dir = testsupport::scratch_dir("cli_errors");
  const fs::path data = dir / "data";
  REQUIRE(run({"simulate", "--out", data.string(), "--last-year", "1985", "--max-age", "30"}).code == 0);
  const fs::path out = dir / "out";

  const std::vector<std::vector<std::string>> cases = {
      {"forecast", "--data", data.string(), "--out", out.string(), "--model", "coherent,bogus"},
      {"forecast", "--data", data.string(), "--out", out.string(), "--alpha", "2"},
      {"forecast", "--data", data.string(), "--out", out.string(), "--kappa", "1.5"},
      {"forecast", "--data", (dir / "missing").string(), "--out", out.string()},
      {"forecast", "--data", data.string(), "--out", out.string(), "--pops", "nobody"},
      {"evaluate", "--data", data.string(), "--out", out.string(), "--windows", "30", "--kappa", "0.2"},
      {"diagnose", "--data", data.string(), "--out", out.string(), "--pops", "synthetic_male", "--kappa", "0.2"},
  };
  for (const auto& args : cases) {
    const Result r = run(args);
    INFO(args[0] << " " << args.back());
    CHECK(r.code != 0);
    CHECK(r.err.rfind("error: ", 0) == 0);
    CHECK(count_lines(r.err) == 1);
    CHECK(files_under(out).empty());
  }
  CHECK(run({"forecast", "--data", data.string(), "--out", out.string(), "--alpha", "2"}).code == 2);
}

TEST_CASE("evaluate and diagnose write their tables") {
  const fs::path dir = testsupport::scratch_dir("cli_eval");
  const fs::path data = dir / "data";
  REQUIRE(run({"simulate", "--out", data.string(), "--last-year", "1980", "--max-age", "30"}).code == 0);
  const fs::path out = dir / "out";
  const Result e = run({"evaluate", "--data", data.string(), "--out", out.string(), "--model",
                        "independent,coherent", "--h", "1,3", "--kappa", "0.2", "--windows", "5"});
  INFO(e.err);
  REQUIRE(e.code == 0);
  const std::string table = slurp(out / "eval.csv");
  CHECK(table.rfind("country,model,h,pop,rmse,avg_rmse,windows,kappa\n", 0) == 0);
  CHECK(count_lines(table) == 1 + 2 * 2 * 2);

  const Result d = run({"diagnose", "--data", data.string(), "--out", out.string(), "--model", "coherent",
                        "--kappa", "0.2", "--h", "30", "--plot"});
  INFO(d.err);
  REQUIRE(d.code == 0);
  CHECK(fs::exists(out / "coherent" / "sex_ratio.csv"));
  CHECK(fs::exists(out / "coherent" / "e0.csv"));
  CHECK(count_lines(slurp(out / "coherent" / "e0.csv")) == 1 + 34 + 30);  // observed years then forecasts
}
