#include "mfpca/demographics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "mfpca/error.hpp"

namespace mfpca {

namespace {
constexpr const char* kModule = "demographics";

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, kModule, "cannot write " + path);
  out << std::setprecision(17);
  return out;
}
}  // namespace

Eigen::MatrixXd sex_ratio(const Eigen::MatrixXd& log_male, const Eigen::MatrixXd& log_female) {
  if (log_male.rows() != log_female.rows() || log_male.cols() != log_female.cols()) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "male and female grids differ in shape");
  }
  return (log_male - log_female).array().exp().matrix();
}

LifeTable life_expectancy(const Eigen::VectorXd& log_rates) {
  const Eigen::Index J = log_rates.size();
  if (J == 0) throw Error(ErrorCode::EmptyInput, kModule, "empty rate row");
  if (!log_rates.allFinite()) throw Error(ErrorCode::NonFiniteInput, kModule, "log rates must be finite");

  LifeTable lt;
  lt.ages.resize(J);
  for (Eigen::Index x = 0; x < J; ++x) lt.ages[x] = static_cast<int>(x);
  lt.m = log_rates.array().exp().matrix();
  lt.q.resize(J);
  for (Eigen::Index x = 0; x + 1 < J; ++x) lt.q(x) = std::min(1.0, lt.m(x) / (1.0 + 0.5 * lt.m(x)));
  lt.q(J - 1) = 1.0;

  lt.l.resize(J);
  lt.l(0) = 1.0;
  for (Eigen::Index x = 1; x < J; ++x) lt.l(x) = lt.l(x - 1) * (1.0 - lt.q(x - 1));

  // Person-years lived in each interval, then cumulated from the top.
  Eigen::VectorXd L(J);
  for (Eigen::Index x = 0; x + 1 < J; ++x) L(x) = 0.5 * (lt.l(x) + lt.l(x + 1));
  L(J - 1) = lt.l(J - 1) / lt.m(J - 1);

  lt.e.resize(J);
  double T = 0.0;
  for (Eigen::Index x = J - 1; x >= 0; --x) {
    T += L(x);
    lt.e(x) = lt.l(x) > 0.0 ? T / lt.l(x) : 0.0;
  }
  return lt;
}

Eigen::VectorXd life_expectancy_at_birth(const Eigen::MatrixXd& log_rates) {
  Eigen::VectorXd e0(log_rates.rows());
  for (Eigen::Index t = 0; t < log_rates.rows(); ++t) {
    e0(t) = life_expectancy(log_rates.row(t).transpose()).e0();
  }
  return e0;
}

void write_sex_ratio_csv(const std::vector<int>& years, const std::vector<int>& ages,
                         const Eigen::MatrixXd& ratio, const std::string& path) {
  if (ratio.rows() != static_cast<Eigen::Index>(years.size()) ||
      ratio.cols() != static_cast<Eigen::Index>(ages.size())) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "ratio grid does not match years x ages");
  }
  auto out = open_out(path);
  out << "year,age,sex_ratio\n";
  for (std::size_t t = 0; t < years.size(); ++t) {
    for (std::size_t j = 0; j < ages.size(); ++j) {
      out << years[t] << ',' << ages[j] << ',' << ratio(t, j) << '\n';
    }
  }
}

void write_e0_csv(const std::vector<int>& years, const Eigen::VectorXd& e0_male,
                  const Eigen::VectorXd& e0_female, const std::string& path) {
  const auto n = static_cast<Eigen::Index>(years.size());
  if (e0_male.size() != n || e0_female.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "e0 series do not match years");
  }
  auto out = open_out(path);
  out << "year,e0_male,e0_female\n";
  for (Eigen::Index t = 0; t < n; ++t) out << years[t] << ',' << e0_male(t) << ',' << e0_female(t) << '\n';
}

}  // namespace mfpca
