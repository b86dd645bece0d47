#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mfpca::cli {

struct RunConfig {
  std::filesystem::path data_path;
  std::vector<std::string> models{"coherent"};
  std::vector<int> horizons{20};
  std::string kappa = "auto";
  double var_threshold = 0.9;
  std::optional<int> ncomp;
  double alpha = 0.05;
  int windows = 10;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 20240101;
  bool plot = false;
  double weight_power = 1.0;
  bool weight_independent = false;
  std::optional<int> train_start;
  std::optional<int> train_end;
  std::vector<std::string> pops;
  int max_age = 100;
  std::string country;
  double divergence = 0.0;
  int first_year = 1947;
  int last_year = 2016;

  // Throws Error(ConfigError) on an invalid combination.
  void validate() const;
};

/// Runs one subcommand. Returns the process exit code; failures print a
/// single `error: ...` line to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mfpca::cli
