#pragma once

#include <Eigen/Dense>
#include <string>

namespace mfpca {

enum class SeriesMode { Nonstationary, Stationary };

// ARIMA(p, d, q) with an optional constant. For d = 0 the constant is the
// process mean, for d = 1 it is the drift of the differenced series; d = 2
// never carries one. ar holds phi_1..phi_p, ma holds theta_1..theta_q in
// (1 - sum phi_i B^i)(1 - B)^d (y_t - ...) = (1 + sum theta_j B^j) e_t.
struct ArimaSpec {
  int p = 0;
  int d = 0;
  int q = 0;
  bool include_drift = false;
  Eigen::VectorXd ar;
  Eigen::VectorXd ma;
  double drift = 0.0;
  double innovation_var = 0.0;
  double loglik = 0.0;
  double aic = 0.0;
  bool fallback = false;  // set when every grid cell failed

  int num_parameters() const { return p + q + 1 + (include_drift ? 1 : 0); }
  // Long-run mean for stationary (d = 0) specs.
  double unconditional_mean() const { return include_drift ? drift : 0.0; }
};

struct ScoreForecast {
  Eigen::VectorXd mean;      // h
  Eigen::VectorXd variance;  // h
  ArimaSpec spec;
};

struct ArimaFitOptions {
  SeriesMode mode = SeriesMode::Nonstationary;
  // Whether grid cells with a constant (mean or drift) are considered.
  bool allow_constant = true;
  int max_p = 2;
  int max_d = 2;
  int max_q = 2;
  double tolerance = 1e-8;
  int max_evaluations = 2000;
};

inline constexpr int kMinSeriesLength = 10;
// AR and MA polynomial roots must lie outside this radius.
inline constexpr double kRootMargin = 1.001;

// Smallest root modulus of 1 + c_1 z + ... + c_k z^k, from the companion
// matrix of the reversed polynomial. +inf when every c_i is zero.
double min_root_modulus(const Eigen::VectorXd& coefficients);

bool is_stationary(const ArimaSpec& spec);

/// Conditional-sum-of-squares fit of a single order. All cells condition on
/// the same leading observations (max_d + max_p), so their Gaussian
/// log-likelihoods are directly comparable by AIC. Returns false when the
/// optimiser cannot find an admissible point.
bool fit_arima(const Eigen::VectorXd& series, int p, int d, int q, bool include_drift,
               const ArimaFitOptions& options, ArimaSpec& out);

/// Minimum-AIC spec over the order grid. Stationary mode fixes d = 0 and
/// rejects cells whose AR roots are not outside kRootMargin. Throws
/// SeriesTooShort below kMinSeriesLength observations.
ArimaSpec fit_auto(const Eigen::VectorXd& series, const ArimaFitOptions& options = {});

/// h-step forecast means by recursion on the differenced scale followed by
/// integration, and variances sigma^2 sum_{j<h} psi_j^2.
ScoreForecast forecast(const ArimaSpec& spec, const Eigen::VectorXd& series, int h);

/// psi-weights of the full ARIMA operator, psi_0 = 1.
Eigen::VectorXd psi_weights(const ArimaSpec& spec, int count);

/// One CSV row: p,d,q,include_drift,ar1,ar2,ma1,ma2,drift,sigma2,loglik,aic,fallback.
std::string arima_csv_header();
std::string to_csv_row(const ArimaSpec& spec);

}  // namespace mfpca
