#include "mfpca/component_rule.hpp"

#include <algorithm>

#include "mfpca/error.hpp"

namespace mfpca {

void ComponentRule::validate() const {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "evaluation", "variance threshold must lie in (0, 1]");
  }
  if (override_count && *override_count < 0) {
    throw Error(ErrorCode::InvalidArgument, "evaluation", "component override must be >= 0");
  }
}

int select_ncomp(const Eigen::VectorXd& eigenvalues, const ComponentRule& rule) {
  rule.validate();
  const int available = static_cast<int>(eigenvalues.size());
  const double total = eigenvalues.sum();
  if (available == 0 || !(total > 0.0)) return 0;
  if (rule.override_count) return std::min(*rule.override_count, available);
  if (rule.threshold >= 1.0) return available;
  // Slack for rounding in the cumulative sum.
  constexpr double kSlack = 1e-12;
  double cumulative = 0.0;
  for (int n = 0; n < available; ++n) {
    cumulative += eigenvalues(n);
    if (cumulative / total >= rule.threshold - kSlack) return n + 1;
  }
  return available;
}

}  // namespace mfpca
