#pragma once

#include <Eigen/Dense>
#include <functional>

namespace mfpca {

struct NelderMeadOptions {
  double tolerance = 1e-8;  // relative spread of simplex function values
  int max_evaluations = 2000;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Derivative-free simplex minimisation started from x0 with per-coordinate
// initial steps. The objective may return +inf to reject a point.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                             const NelderMeadOptions& options = {});

}  // namespace mfpca
