#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mfpca {

struct LifeTable {
  std::vector<int> ages;
  Eigen::VectorXd m;
  Eigen::VectorXd q;
  Eigen::VectorXd l;  // survivors at exact age x, radix 1
  Eigen::VectorXd e;  // remaining life expectancy at age x

  double e0() const { return e(0); }
};

/// exp(log_male - log_female) elementwise. Throws ShapeMismatch.
Eigen::MatrixXd sex_ratio(const Eigen::MatrixXd& log_male, const Eigen::MatrixXd& log_female);

/// Period life table from one row of log central death rates, a_x = 0.5 and
/// an open last interval closed with e = 1/m. Throws NonFiniteInput.
LifeTable life_expectancy(const Eigen::VectorXd& log_rates);

/// e0 for every row of a years x ages matrix.
Eigen::VectorXd life_expectancy_at_birth(const Eigen::MatrixXd& log_rates);

void write_sex_ratio_csv(const std::vector<int>& years, const std::vector<int>& ages,
                         const Eigen::MatrixXd& ratio, const std::string& path);

void write_e0_csv(const std::vector<int>& years, const Eigen::VectorXd& e0_male,
                  const Eigen::VectorXd& e0_female, const std::string& path);

}  // namespace mfpca
