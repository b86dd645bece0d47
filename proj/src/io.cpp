#include "mfpca/io.hpp"

#include <fstream>
#include <iomanip>

#include "mfpca/error.hpp"
#include "mfpca/hmd.hpp"

namespace mfpca {

namespace fs = std::filesystem;

namespace {
constexpr const char* kModule = "io";

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, kModule, "cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, kModule, "cannot create " + dir.string() + ": " + ec.message());
}

// Rows keyed by `keys` (ages or years), one column per matrix column.
void write_columns(const fs::path& path, const std::string& key_name, const std::vector<int>& keys,
                   const std::vector<std::string>& names, const Eigen::MatrixXd& values) {
  auto out = open_out(path);
  out << key_name;
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < keys.size(); ++r) {
    out << keys[r];
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << ',' << values(static_cast<Eigen::Index>(r), c);
    out << '\n';
  }
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index k = 1; k <= n; ++k) out.push_back(prefix + std::to_string(k));
  return out;
}

void write_eigenvalues(const fs::path& path, const Eigen::VectorXd& values, const Eigen::VectorXd& shares) {
  auto out = open_out(path);
  out << "component,eigenvalue,var_explained\n";
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    out << k + 1 << ',' << values(k) << ',' << shares(k) << '\n';
  }
}

std::string_view mode_name(SeriesMode m) {
  return m == SeriesMode::Stationary ? "stationary" : "nonstationary";
}
}  // namespace

void write_fpca_fit(const FpcaFit& fit, const std::vector<int>& years, const std::vector<int>& ages,
                    const fs::path& dir) {
  make_dir(dir);
  write_columns(dir / "mean.csv", "age", ages, {"mean"}, fit.mean_fn);
  write_columns(dir / "eigenfunctions.csv", "age", ages, numbered("phi", fit.num_components()),
                fit.eigenfunctions.transpose());
  write_columns(dir / "scores.csv", "year", years, numbered("score", fit.num_components()), fit.scores);
  write_eigenvalues(dir / "eigenvalues.csv", fit.eigenvalues, fit.var_explained);
}

void write_mfpca_fit(const MfpcaFit& fit, const std::vector<std::string>& population_ids,
                     const std::vector<int>& years, const std::vector<int>& ages, const fs::path& dir) {
  if (population_ids.size() != fit.num_populations()) {
    throw Error(ErrorCode::ShapeMismatch, kModule, "population ids do not match the fit");
  }
  make_dir(dir);
  for (std::size_t i = 0; i < population_ids.size(); ++i) {
    const fs::path sub = dir / population_ids[i];
    write_fpca_fit(fit.per_pop_fits[i], years, ages, sub);
    write_columns(sub / "psi.csv", "age", ages, numbered("psi", fit.num_components()),
                  fit.multi_eigenfunctions[i].transpose());
  }
  write_columns(dir / "scores.csv", "year", years, numbered("rho", fit.num_components()), fit.shared_scores);
  write_eigenvalues(dir / "eigenvalues.csv", fit.joint_eigenvalues, fit.var_explained);
}

fs::path write_model(const FittedModel& model, const fs::path& dir) {
  const fs::path root = dir / std::string(to_string(model.kind));
  make_dir(root);
  const std::size_t p = model.num_populations();
  const Eigen::Index J = static_cast<Eigen::Index>(model.ages.size());
  const Eigen::Index T = static_cast<Eigen::Index>(model.years.size());

  Eigen::MatrixXd base(J, static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i) base.col(static_cast<Eigen::Index>(i)) = model.base[i];
  write_columns(root / "base.csv", "age", model.ages, model.population_ids, base);
  write_columns(root / "weights.csv", "year", model.years, {"weight"}, model.weights.weights);

  std::vector<std::string> labels;
  Eigen::MatrixXd scores(T, static_cast<Eigen::Index>(model.components.size()));
  {
    auto out = open_out(root / "components.csv");
    out << "label,mode," << arima_csv_header() << '\n';
    for (std::size_t c = 0; c < model.components.size(); ++c) {
      const auto& comp = model.components[c];
      labels.push_back(comp.label);
      scores.col(static_cast<Eigen::Index>(c)) = comp.scores;
      out << comp.label << ',' << mode_name(comp.mode) << ',' << to_csv_row(comp.spec) << '\n';
    }
  }
  write_columns(root / "component_scores.csv", "year", model.years, labels, scores);
  for (std::size_t i = 0; i < p; ++i) {
    Eigen::MatrixXd basis(J, static_cast<Eigen::Index>(model.components.size()));
    for (std::size_t c = 0; c < model.components.size(); ++c) {
      basis.col(static_cast<Eigen::Index>(c)) = model.components[c].basis[i];
    }
    write_columns(root / ("basis_" + model.population_ids[i] + ".csv"), "age", model.ages, labels, basis);
  }

  for (std::size_t i = 0; i < model.independent_fits.size(); ++i) {
    write_fpca_fit(model.independent_fits[i], model.years, model.ages, root / model.population_ids[i]);
  }
  if (model.mfpca_fit) write_mfpca_fit(*model.mfpca_fit, model.population_ids, model.years, model.ages, root / "mfpca");
  if (model.coherent_fit) {
    write_fpca_fit(model.coherent_fit->common_fit, model.years, model.ages, root / "common");
    write_mfpca_fit(model.coherent_fit->deviation_fit, model.population_ids, model.years, model.ages,
                    root / "deviation");
  }
  if (model.product_ratio_fit) {
    write_fpca_fit(model.product_ratio_fit->product_fit, model.years, model.ages, root / "product");
    for (std::size_t i = 0; i < p; ++i) {
      write_fpca_fit(model.product_ratio_fit->ratio_fits[i], model.years, model.ages,
                     root / ("ratio_" + model.population_ids[i]));
    }
  }
  return root;
}

void write_forecast_csv(const ForecastSurface& f, const fs::path& path) {
  auto out = open_out(path);
  out << "year,age,mean,variance,lower,upper\n";
  for (std::size_t k = 0; k < f.horizon_years.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    for (std::size_t j = 0; j < f.ages.size(); ++j) {
      const auto c = static_cast<Eigen::Index>(j);
      out << f.horizon_years[k] << ',' << f.ages[j] << ',' << f.mean(r, c) << ',' << f.variance(r, c) << ','
          << f.lower(r, c) << ',' << f.upper(r, c) << '\n';
    }
  }
}

void write_sigma_csv(const MortalitySurface& surface, const ResidualField& residuals, const fs::path& path) {
  write_grid_csv(surface.years, surface.ages, residuals.sigma, "sigma", path);
}

ResidualField read_sigma_csv(const fs::path& path) {
  GridCsv grid = read_grid_csv(path, "sigma");
  ResidualField r;
  r.sigma = std::move(grid.values);
  r.sigma_avg = residual_rms(r.sigma);
  return r;
}

}  // namespace mfpca
