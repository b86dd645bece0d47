#include "mfpca/arima.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "mfpca/error.hpp"
#include "mfpca/nelder_mead.hpp"

namespace mfpca {

namespace {

constexpr const char* kModule = "tsmodels";
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd difference(const Eigen::VectorXd& y, int d) {
  Eigen::VectorXd z = y;
  for (int k = 0; k < d; ++k) {
    if (z.size() < 2) return Eigen::VectorXd(0);
    z = (z.tail(z.size() - 1) - z.head(z.size() - 1)).eval();
  }
  return z;
}

// Conditional residuals e_k for k >= p, with e_k = 0 before; returns the sum
// of squares over k >= first_scored.
double css(const Eigen::VectorXd& z, const Eigen::VectorXd& ar, const Eigen::VectorXd& ma,
           double mu, Eigen::Index first_scored, Eigen::VectorXd* residuals = nullptr) {
  const Eigen::Index n = z.size();
  const Eigen::Index p = ar.size();
  const Eigen::Index q = ma.size();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  double sse = 0.0;
  for (Eigen::Index k = p; k < n; ++k) {
    double pred = mu;
    for (Eigen::Index i = 1; i <= p; ++i) pred += ar(i - 1) * (z(k - i) - mu);
    for (Eigen::Index j = 1; j <= q && k - j >= 0; ++j) pred += ma(j - 1) * e(k - j);
    e(k) = z(k) - pred;
    if (k >= first_scored) sse += e(k) * e(k);
  }
  if (residuals) *residuals = std::move(e);
  return sse;
}

bool admissible(const Eigen::VectorXd& ar, const Eigen::VectorXd& ma) {
  return min_root_modulus(-ar) > kRootMargin && min_root_modulus(ma) > kRootMargin;
}

int conditioning_start(const ArimaFitOptions& options) {
  const int max_d = options.mode == SeriesMode::Stationary ? 0 : options.max_d;
  return max_d + options.max_p;
}

}  // namespace

double min_root_modulus(const Eigen::VectorXd& c) {
  Eigen::Index k = c.size();
  while (k > 0 && c(k - 1) == 0.0) --k;
  if (k == 0) return kInf;
  // Roots of 1 + c1 z + ... + ck z^k are reciprocals of the roots of
  // z^k + c1 z^(k-1) + ... + ck.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
  companion.row(0) = -c.head(k).transpose();
  if (k > 1) companion.block(1, 0, k - 1, k - 1).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  const double largest = solver.eigenvalues().cwiseAbs().maxCoeff();
  return largest > 0.0 ? 1.0 / largest : kInf;
}

bool is_stationary(const ArimaSpec& spec) {
  return spec.d == 0 && min_root_modulus(-spec.ar) > kRootMargin;
}

bool fit_arima(const Eigen::VectorXd& series, int p, int d, int q, bool include_drift,
               const ArimaFitOptions& options, ArimaSpec& out) {
  const Eigen::VectorXd z = difference(series, d);
  const Eigen::Index first_scored = conditioning_start(options) - d;
  const Eigen::Index n_eff = z.size() - first_scored;
  if (first_scored < p || n_eff < 2) return false;

  const Eigen::Index dim = p + q + (include_drift ? 1 : 0);
  auto unpack = [&](const Eigen::VectorXd& x, Eigen::VectorXd& ar, Eigen::VectorXd& ma,
                    double& mu) {
    ar = x.head(p);
    ma = x.segment(p, q);
    mu = include_drift ? x(p + q) : 0.0;
  };
  auto objective = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd ar, ma;
    double mu = 0.0;
    unpack(x, ar, ma, mu);
    if (!admissible(ar, ma)) return kInf;
    return css(z, ar, ma, mu, first_scored);
  };

  const double z_mean = z.tail(n_eff).mean();
  const double z_sd = std::sqrt((z.tail(n_eff).array() - z_mean).square().mean());
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd steps = Eigen::VectorXd::Constant(dim, 0.1);
  if (include_drift) {
    x0(dim - 1) = z_mean;
    steps(dim - 1) = z_sd > 0.0 ? 0.1 * z_sd : 0.1 * std::max(1.0, std::abs(z_mean));
  }

  NelderMeadOptions nm{options.tolerance, options.max_evaluations};
  NelderMeadResult res = nelder_mead(objective, x0, steps, nm);
  if (dim > 0 && std::isfinite(res.value)) {
    // One restart from the optimum guards against a collapsed simplex.
    const int remaining = options.max_evaluations - res.evaluations;
    if (remaining > 0) {
      NelderMeadResult again = nelder_mead(objective, res.x, steps * 0.1, {options.tolerance, remaining});
      if (again.value <= res.value) res = again;
    }
  }
  if (!std::isfinite(res.value)) return false;

  ArimaSpec spec;
  spec.p = p;
  spec.d = d;
  spec.q = q;
  spec.include_drift = include_drift;
  unpack(res.x, spec.ar, spec.ma, spec.drift);
  const double sse = res.value;
  const double n = static_cast<double>(n_eff);
  spec.innovation_var = sse / n;
  const double log_var = std::log(std::max(spec.innovation_var, std::numeric_limits<double>::min()));
  spec.loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi) + log_var + 1.0);
  spec.aic = 2.0 * spec.num_parameters() - 2.0 * spec.loglik;
  out = std::move(spec);
  return true;
}

ArimaSpec fit_auto(const Eigen::VectorXd& series, const ArimaFitOptions& options) {
  if (series.size() < kMinSeriesLength) {
    throw Error(ErrorCode::SeriesTooShort, kModule,
                "need at least " + std::to_string(kMinSeriesLength) + " observations, got " +
                    std::to_string(series.size()));
  }
  if (!series.allFinite()) throw Error(ErrorCode::NonFiniteInput, kModule, "series not finite");

  const bool stationary = options.mode == SeriesMode::Stationary;
  const int max_d = stationary ? 0 : options.max_d;

  ArimaSpec best;
  bool have_best = false;
  for (int d = 0; d <= max_d; ++d) {
    for (int p = 0; p <= options.max_p; ++p) {
      for (int q = 0; q <= options.max_q; ++q) {
        for (int with_const = 0; with_const <= 1; ++with_const) {
          if (with_const && (!options.allow_constant || d > 1)) continue;
          ArimaSpec candidate;
          if (!fit_arima(series, p, d, q, with_const == 1, options, candidate)) continue;
          if (stationary && !is_stationary(candidate)) continue;
          if (!have_best || candidate.aic < best.aic) {
            best = std::move(candidate);
            have_best = true;
          }
        }
      }
    }
  }
  if (have_best) return best;

  // Every cell failed: random walk with drift, or white noise.
  ArimaSpec fb;
  fb.fallback = true;
  fb.ar.resize(0);
  fb.ma.resize(0);
  const Eigen::VectorXd z = stationary ? series : difference(series, 1);
  fb.d = stationary ? 0 : 1;
  fb.include_drift = !stationary || options.allow_constant;
  fb.drift = fb.include_drift ? z.mean() : 0.0;
  fb.innovation_var = (z.array() - fb.drift).square().mean();
  const double n = static_cast<double>(z.size());
  fb.loglik = -0.5 * n *
              (std::log(2.0 * std::numbers::pi) +
               std::log(std::max(fb.innovation_var, std::numeric_limits<double>::min())) + 1.0);
  fb.aic = 2.0 * fb.num_parameters() - 2.0 * fb.loglik;
  return fb;
}

Eigen::VectorXd psi_weights(const ArimaSpec& spec, int count) {
  // Full AR operator phi(B)(1 - B)^d expressed as 1 - sum a_i B^i.
  Eigen::VectorXd poly = Eigen::VectorXd::Zero(spec.p + 1);
  poly(0) = 1.0;
  for (int i = 0; i < spec.p; ++i) poly(i + 1) = -spec.ar(i);
  for (int k = 0; k < spec.d; ++k) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(poly.size() + 1);
    next.head(poly.size()) += poly;
    next.tail(poly.size()) -= poly;
    poly = next;
  }
  const Eigen::Index order = poly.size() - 1;
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(std::max(count, 0));
  for (int j = 0; j < count; ++j) {
    double v = j == 0 ? 1.0 : (j <= spec.q ? spec.ma(j - 1) : 0.0);
    for (Eigen::Index i = 1; i <= std::min<Eigen::Index>(j, order); ++i) v -= poly(i) * psi(j - i);
    psi(j) = v;
  }
  return psi;
}

ScoreForecast forecast(const ArimaSpec& spec, const Eigen::VectorXd& series, int h) {
  if (h < 1) throw Error(ErrorCode::InvalidArgument, kModule, "horizon must be >= 1");
  if (spec.ar.size() != spec.p || spec.ma.size() != spec.q || spec.innovation_var < 0.0) {
    throw Error(ErrorCode::InvalidArgument, kModule, "inconsistent ARIMA spec");
  }
  if (series.size() <= spec.d) {
    throw Error(ErrorCode::SeriesTooShort, kModule, "series shorter than differencing order");
  }

  std::vector<Eigen::VectorXd> levels{series};
  for (int k = 0; k < spec.d; ++k) levels.push_back(difference(levels.back(), 1));
  const Eigen::VectorXd& z = levels.back();
  const Eigen::Index n = z.size();
  const double mu = spec.include_drift ? spec.drift : 0.0;

  Eigen::VectorXd resid;
  css(z, spec.ar, spec.ma, mu, 0, &resid);

  Eigen::VectorXd zext(n + h), eext = Eigen::VectorXd::Zero(n + h);
  zext.head(n) = z;
  eext.head(n) = resid;
  for (Eigen::Index k = n; k < n + h; ++k) {
    double v = mu;
    for (int i = 1; i <= spec.p; ++i) v += spec.ar(i - 1) * ((k - i >= 0 ? zext(k - i) : mu) - mu);
    for (int j = 1; j <= spec.q; ++j) {
      if (k - j >= 0) v += spec.ma(j - 1) * eext(k - j);
    }
    zext(k) = v;
  }

  Eigen::VectorXd future = zext.tail(h);
  for (int lev = spec.d - 1; lev >= 0; --lev) {
    double last = levels[static_cast<std::size_t>(lev)](levels[static_cast<std::size_t>(lev)].size() - 1);
    for (int k = 0; k < h; ++k) {
      last += future(k);
      future(k) = last;
    }
  }

  ScoreForecast out;
  out.mean = future;
  const Eigen::VectorXd psi = psi_weights(spec, h);
  out.variance.resize(h);
  double acc = 0.0;
  for (int k = 0; k < h; ++k) {
    acc += psi(k) * psi(k);
    out.variance(k) = spec.innovation_var * acc;
  }
  out.spec = spec;
  return out;
}

std::string arima_csv_header() {
  return "p,d,q,include_drift,ar1,ar2,ma1,ma2,drift,sigma2,loglik,aic,fallback";
}

std::string to_csv_row(const ArimaSpec& spec) {
  std::ostringstream os;
  os << std::setprecision(17);
  auto coef = [](const Eigen::VectorXd& v, int i) { return i < v.size() ? v(i) : 0.0; };
  os << spec.p << ',' << spec.d << ',' << spec.q << ',' << (spec.include_drift ? 1 : 0) << ','
     << coef(spec.ar, 0) << ',' << coef(spec.ar, 1) << ',' << coef(spec.ma, 0) << ','
     << coef(spec.ma, 1) << ',' << spec.drift << ',' << spec.innovation_var << ',' << spec.loglik
     << ',' << spec.aic << ',' << (spec.fallback ? 1 : 0);
  return os.str();
}

}  // namespace mfpca
