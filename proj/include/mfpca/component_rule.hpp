#pragma once

#include <Eigen/Dense>
#include <optional>

namespace mfpca {

// Number of components to retain: the smallest N >= 1 whose cumulative
// eigenvalue share reaches `threshold`, unless `override_count` is set.
struct ComponentRule {
  double threshold = 0.9;
  std::optional<int> override_count;

  void validate() const;
};

// Returns 0 when every eigenvalue is zero. An override larger than the
// number of eigenvalues is clamped to that number.
int select_ncomp(const Eigen::VectorXd& eigenvalues, const ComponentRule& rule);

}  // namespace mfpca
