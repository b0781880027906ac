#include "figures.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>

#include <nlohmann/json.hpp>

#include "popsel/errors.hpp"
#include "popsel/io.hpp"
#include "popsel/likelihood.hpp"
#include "popsel/validate.hpp"
#include "popsel/version.hpp"

namespace popsel::figures {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

json base_meta(const char* what, std::uint64_t seed, const Stopwatch& timer) {
  return {{"tool", "popsel"},
          {"version", kVersion},
          {"command", "reproduce-figure"},
          {"figure", what},
          {"seed", seed},
          {"wall_time_s", timer.seconds()}};
}

DensityGrid tabulate(const std::function<double(double)>& log_pdf,
                     const std::vector<double>& points) {
  DensityGrid g;
  g.points = points;
  g.log_values.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    g.log_values[i] = log_pdf(points[i]);
  }
  return g;
}

int draw_thin(std::size_t n_draws, std::size_t target) {
  return static_cast<int>(std::max<std::size_t>(1, n_draws / target));
}

DensityDraws render_gaussian_draws(const PosteriorSamples& samples,
                                   const std::vector<double>& grid,
                                   std::size_t target_draws) {
  return render_posterior_densities(
      samples,
      [](std::span<const double> row, double x) {
        return gaussian_logpdf(x, row[0], row[1]);
      },
      grid, draw_thin(samples.n_draws(), target_draws));
}

/// Normalised grid holding the pointwise median of a draw set.
DensityGrid median_grid(const DensityDraws& draws) {
  DensityGrid g;
  g.points = draws.points;
  g.log_values.resize(draws.points.size());
  for (std::size_t i = 0; i < draws.points.size(); ++i) {
    g.log_values[i] =
        draws.median[i] > 0.0 ? std::log(draws.median[i]) : log_zero();
  }
  normalize_grid(g);
  return g;
}

/// CDF of a grid density at each of the sorted sample values.
std::vector<double> cdf_at_values(const DensityGrid& grid,
                                  std::vector<double> sorted_values) {
  std::vector<double> cum(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double h = grid.points[i] - grid.points[i - 1];
    const double a =
        is_log_zero(grid.log_values[i - 1]) ? 0.0 : std::exp(grid.log_values[i - 1]);
    const double b =
        is_log_zero(grid.log_values[i]) ? 0.0 : std::exp(grid.log_values[i]);
    cum[i] = cum[i - 1] + 0.5 * h * (a + b);
  }
  const double total = cum.back();
  std::vector<double> out;
  out.reserve(sorted_values.size());
  for (double v : sorted_values) {
    const auto it =
        std::upper_bound(grid.points.begin(), grid.points.end(), v);
    if (it == grid.points.begin()) {
      out.push_back(0.0);
      continue;
    }
    if (it == grid.points.end()) {
      out.push_back(1.0);
      continue;
    }
    const std::size_t hi = static_cast<std::size_t>(it - grid.points.begin());
    const std::size_t lo = hi - 1;
    const double t = (v - grid.points[lo]) / (grid.points[hi] - grid.points[lo]);
    out.push_back((cum[lo] + t * (cum[hi] - cum[lo])) / total);
  }
  return out;
}

SamplerConfig default_fit_config(std::uint64_t seed, std::uint64_t stream) {
  SamplerConfig sc;
  sc.n_steps = 4000;
  sc.seed = seed;
  sc.stream = stream;
  return sc;
}

void require_converged(const PosteriorSamples& samples, const char* what) {
  if (!samples.diag.converged) {
    throw ConvergenceError(std::string(what) +
                           ": sampler did not reach its ESS floor");
  }
}

json truth_json(const PopulationPreset& preset) {
  return {{"mu_lambda", preset.intrinsic.mu_lambda},
          {"sigma_lambda", preset.intrinsic.sigma_lambda},
          {"mu_d", preset.selection.mu_d},
          {"sigma_d", preset.selection.sigma_d},
          {"sigma_0", preset.sigma_0}};
}

int fig_posterior(const fs::path& out_dir, std::uint64_t seed,
                  std::size_t n_events, const char* name) {
  Stopwatch timer;
  const auto preset = table_preset(name);
  RngStream sim_rng(seed, 1);
  const Catalog cat = draw_catalog_bernoulli(
      preset.intrinsic, SelectionFunction{preset.selection}, n_events,
      preset.sigma_0, sim_rng);
  io::write_catalog_csv(out_dir / "catalog.csv", cat);

  const auto theta =
      fit_observed_gaussian(cat, default_fit_config(seed, 2));
  require_converged(theta, "observed fit");
  const auto lambda = remap_samples(theta, preset.selection);

  io::write_samples_csv(out_dir / "theta_samples.csv", theta);
  io::write_samples_csv(out_dir / "lambda_samples.csv", lambda);

  json meta = base_meta(name, seed, timer);
  meta["truth"] = truth_json(preset);
  meta["n_events"] = n_events;
  meta["theta"] = io::samples_metadata(theta);
  meta["lambda"] = io::samples_metadata(lambda);
  // Per-parameter z-scores of the truth under the remapped posterior.
  const std::vector<double> truth{preset.intrinsic.mu_lambda,
                                  preset.intrinsic.sigma_lambda};
  json z = json::array();
  for (std::size_t p = 0; p < 2; ++p) {
    const auto xs = lambda.column(p);
    const MeanSs ms = mean_and_sumsq(xs);
    const double sd = std::sqrt(ms.centered_sumsq / (xs.size() - 1));
    z.push_back((ms.mean - truth[p]) / sd);
  }
  meta["z_scores"] = z;
  io::write_metadata(out_dir / "lambda_samples.csv", meta);
  return 0;
}

int fig2(const fs::path& out_dir, std::uint64_t seed) {
  Stopwatch timer;
  const auto preset = table_preset("narrow");
  const SelectionFunction sel{preset.selection};
  RngStream sim_rng(seed, 1);
  const Catalog cat = draw_catalog_bernoulli(preset.intrinsic, sel, 1000,
                                             preset.sigma_0, sim_rng);
  const auto grid = linspace(-4.5, 0.5, 1001);

  // Recipe 1: remap Theta draws into Lambda and render the implied p_int.
  const auto theta = fit_observed_gaussian(cat, default_fit_config(seed, 2));
  require_converged(theta, "observed fit");
  const auto lambda = remap_samples(theta, preset.selection);
  const auto remap_draws = render_gaussian_draws(lambda, grid, 500);
  io::write_draws_csv(out_dir / "remap_intrinsic.csv", remap_draws);

  // Recipe 2: divide the inferred observed density by p_det.
  const auto observed_draws = render_gaussian_draws(theta, grid, 500);
  const auto divided = postprocess_intrinsic(observed_draws, sel);
  io::write_draws_csv(out_dir / "division_intrinsic.csv", divided);

  // Recipe 3: non-parametric approximant of p_obs divided by p_det.
  RngStream gibbs_rng(seed, 3);
  DpgmmConfig dc;
  const auto chain = run_dpgmm_chain(cat, std::nullopt, dc, gibbs_rng);
  const auto dpgmm_obs = density_draws(chain, grid, 2);
  const auto dpgmm_intrinsic = postprocess_intrinsic(dpgmm_obs, sel);
  io::write_draws_csv(out_dir / "dpgmm_intrinsic.csv", dpgmm_intrinsic);

  io::write_grid_csv(out_dir / "true_intrinsic.csv",
                     tabulate(
                         [&](double x) {
                           return gaussian_logpdf(x, preset.intrinsic.mu_lambda,
                                                  preset.intrinsic.sigma_lambda);
                         },
                         grid));

  json meta = base_meta("2", seed, timer);
  meta["truth"] = truth_json(preset);
  meta["recipes"] = {"remap_intrinsic", "division_intrinsic",
                     "dpgmm_intrinsic"};
  io::write_metadata(out_dir / "remap_intrinsic.csv", meta);
  return 0;
}

int fig3(const fs::path& out_dir, std::uint64_t seed, int threads) {
  Stopwatch timer;
  json summary = json::object();
  for (const char* name : {"wide", "narrow", "equal"}) {
    const auto preset = table_preset(name);
    PPConfig config;
    config.n_trials = 100;
    config.n_events = 1000;
    config.pipeline = Pipeline::post_process;
    config.seed = seed;
    config.n_threads = threads;
    const PPResult result = run_pp_trials(preset, config);
    io::write_pp_csv(out_dir / (std::string("pp_") + name + ".csv"), result);
    json per_model;
    for (std::size_t p = 0; p < result.parameter_names.size(); ++p) {
      per_model[result.parameter_names[p]] = {
          {"ks_statistic", result.ks[p].statistic},
          {"ks_p_value", result.ks[p].p_value},
          {"band_coverage_90", beta_band_coverage(result.percentiles[p], 0.9)},
      };
    }
    per_model["n_excluded"] = result.n_excluded;
    per_model["uniformity_pass"] = result.uniformity_pass;
    summary[name] = per_model;
  }

  const auto band = beta_credible_band(100, 0.9);
  std::FILE* f = nullptr;
  {
    const fs::path band_path = out_dir / "band.csv";
    f = std::fopen(band_path.string().c_str(), "w");
  }
  if (f != nullptr) {
    std::fputs("rank,lower,upper\n", f);
    for (std::size_t k = 0; k < band.size(); ++k) {
      std::fprintf(f, "%zu,%s,%s\n", k + 1,
                   io::format_double(band[k].first).c_str(),
                   io::format_double(band[k].second).c_str());
    }
    std::fclose(f);
  }

  json meta = base_meta("3", seed, timer);
  meta["summary"] = summary;
  io::write_metadata(out_dir / "pp_wide.csv", meta);
  return 0;
}

int fig5(const fs::path& out_dir, std::uint64_t seed) {
  Stopwatch timer;
  const IntrinsicModel intr{0.0, 3.0};
  const double threshold = -1.0;
  const double sigma_0 = 1.0;
  const SelectionFunction sel = StepSelection{threshold};

  RngStream sim_rng(seed, 1);
  const Catalog cat = draw_catalog_bernoulli(intr, sel, 1000, sigma_0, sim_rng);
  io::write_catalog_csv(out_dir / "catalog.csv", cat);
  const auto grid = linspace(-6.0, 12.0, 1801);

  // Correct treatment: model the observed values as a truncated Gaussian.
  const auto trunc_fit =
      fit_observed_truncated(cat, threshold, default_fit_config(seed, 2));
  require_converged(trunc_fit, "truncated fit");
  const auto trunc_draws = render_posterior_densities(
      trunc_fit,
      [threshold](std::span<const double> row, double x) {
        return truncnorm_logpdf(x, TruncGaussianParams{row[0], row[1],
                                                       threshold});
      },
      grid, draw_thin(trunc_fit.n_draws(), 500));
  io::write_draws_csv(out_dir / "truncated_fit.csv", trunc_draws);

  // Deliberately wrong treatment: a plain Gaussian observed model.
  const auto wrong_fit =
      fit_observed_gaussian(cat, default_fit_config(seed, 3));
  require_converged(wrong_fit, "gaussian fit");
  const auto wrong_draws = render_gaussian_draws(wrong_fit, grid, 500);
  io::write_draws_csv(out_dir / "gaussian_fit.csv", wrong_draws);

  const auto true_obs = tabulate(
      [&](double x) {
        return truncnorm_logpdf(
            x, TruncGaussianParams{intr.mu_lambda, intr.sigma_lambda,
                                   threshold});
      },
      grid);
  io::write_grid_csv(out_dir / "true_observed.csv", true_obs);

  // KS of the simulated p_obs sample (the true values) against each
  // posterior-median density.
  auto values = cat.true_values();
  std::sort(values.begin(), values.end());
  const auto ks_trunc =
      ks_test_against_cdf(cdf_at_values(median_grid(trunc_draws), values));
  const auto ks_wrong =
      ks_test_against_cdf(cdf_at_values(median_grid(wrong_draws), values));

  json meta = base_meta("5", seed, timer);
  meta["truth"] = {{"mu_lambda", intr.mu_lambda},
                   {"sigma_lambda", intr.sigma_lambda},
                   {"threshold", threshold},
                   {"sigma_0", sigma_0}};
  meta["ks_truncated_fit"] = {{"statistic", ks_trunc.statistic},
                              {"p_value", ks_trunc.p_value}};
  meta["ks_gaussian_fit"] = {{"statistic", ks_wrong.statistic},
                             {"p_value", ks_wrong.p_value}};
  io::write_metadata(out_dir / "truncated_fit.csv", meta);
  return 0;
}

int fig6(const fs::path& out_dir, std::uint64_t seed) {
  Stopwatch timer;
  auto preset = table_preset("narrow");
  preset.sigma_0 = 0.3;
  const SelectionFunction sel{preset.selection};

  RngStream sim_rng(seed, 1);
  const Catalog cat = draw_catalog_bernoulli(preset.intrinsic, sel, 1000,
                                             preset.sigma_0, sim_rng);
  io::write_catalog_csv(out_dir / "catalog.csv", cat);
  const auto grid = linspace(-4.5, 0.5, 801);

  DpgmmConfig dc;
  RngStream runtime_rng(seed, 2);
  const auto runtime_chain = run_dpgmm_chain(cat, sel, dc, runtime_rng);
  const auto runtime_draws = density_draws(runtime_chain, grid, 2);
  io::write_draws_csv(out_dir / "runtime_intrinsic.csv", runtime_draws);

  RngStream plain_rng(seed, 3);
  const auto plain_chain = run_dpgmm_chain(cat, std::nullopt, dc, plain_rng);
  const auto observed_draws = density_draws(plain_chain, grid, 2);
  const auto post_draws = postprocess_intrinsic(observed_draws, sel);
  io::write_draws_csv(out_dir / "postprocess_intrinsic.csv", post_draws);

  const auto true_intr = tabulate(
      [&](double x) {
        return gaussian_logpdf(x, preset.intrinsic.mu_lambda,
                               preset.intrinsic.sigma_lambda);
      },
      grid);
  io::write_grid_csv(out_dir / "true_intrinsic.csv", true_intr);

  json meta = base_meta("6", seed, timer);
  meta["truth"] = truth_json(preset);
  meta["js_divergence_medians"] =
      js_divergence(median_grid(runtime_draws), median_grid(post_draws));
  io::write_metadata(out_dir / "runtime_intrinsic.csv", meta);
  return 0;
}

}  // namespace

int reproduce(int figure, const std::filesystem::path& out_dir,
              std::uint64_t seed, int threads) {
  std::filesystem::create_directories(out_dir);
  switch (figure) {
    case 1:
      return fig_posterior(out_dir, seed, 1000, "narrow");
    case 2:
      return fig2(out_dir, seed);
    case 3:
      return fig3(out_dir, seed, threads);
    case 4:
      return fig_posterior(out_dir, seed, 1000000, "equal");
    case 5:
      return fig5(out_dir, seed);
    case 6:
      return fig6(out_dir, seed);
    default:
      throw std::invalid_argument("reproduce-figure: figure must be 1..6");
  }
}

}  // namespace popsel::figures
