#include "popsel/validate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/beta.hpp>

#include "popsel/errors.hpp"
#include "popsel/likelihood.hpp"
#include "popsel/simulate.hpp"
#include "popsel/stats.hpp"

namespace popsel {

namespace {

// Asymptotic Kolmogorov distribution Q(lambda) = 2 sum (-1)^(k-1)
// exp(-2 k^2 lambda^2), with the Stephens small-sample correction applied
// by the callers.
double kolmogorov_sf(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_p_value(double statistic, double n_eff) {
  const double sn = std::sqrt(n_eff);
  return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * statistic);
}

}  // namespace

KsResult ks_test_against_cdf(std::span<const double> cdf_at_sorted) {
  const std::size_t n = cdf_at_sorted.size();
  if (n < 1) throw std::domain_error("ks_test: empty sample");
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = cdf_at_sorted[i];
    const double hi = static_cast<double>(i + 1) / n - c;
    const double lo = c - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  return {d, ks_p_value(d, static_cast<double>(n))};
}

KsResult ks_uniformity_test(std::span<const double> values) {
  if (values.size() < 10) {
    throw std::domain_error("ks_uniformity_test: need at least 10 values");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  for (double v : sorted) {
    if (v < 0.0 || v > 1.0 || !std::isfinite(v)) {
      throw std::domain_error("ks_uniformity_test: values must be in [0,1]");
    }
  }
  return ks_test_against_cdf(sorted);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::domain_error("ks_two_sample: empty sample");
  }
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    if (sa[i] <= sb[j]) {
      ++i;
    } else {
      ++j;
    }
    const double fa = static_cast<double>(i) / sa.size();
    const double fb = static_cast<double>(j) / sb.size();
    d = std::max(d, std::abs(fa - fb));
  }
  const double n_eff = static_cast<double>(sa.size()) * sb.size() /
                       static_cast<double>(sa.size() + sb.size());
  return {d, ks_p_value(d, n_eff)};
}

std::vector<double> percentile_of_truth(
    const PosteriorSamples& samples,
    const std::vector<std::pair<std::string, double>>& truth) {
  if (samples.n_draws() < 100) {
    throw std::domain_error("percentile_of_truth: need >= 100 draws");
  }
  std::vector<double> out;
  out.reserve(truth.size());
  for (const auto& [name, value] : truth) {
    const std::size_t idx = samples.param_index(name);
    std::size_t below = 0;
    for (std::size_t i = 0; i < samples.n_draws(); ++i) {
      if (samples.at(i, idx) < value) ++below;
    }
    out.push_back(static_cast<double>(below) /
                  static_cast<double>(samples.n_draws()));
  }
  return out;
}

std::vector<std::pair<double, double>> beta_credible_band(int n_trials,
                                                          double level) {
  if (n_trials < 1) throw std::domain_error("beta_credible_band: n < 1");
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("beta_credible_band: level must be in (0,1)");
  }
  const double tail = 0.5 * (1.0 - level);
  std::vector<std::pair<double, double>> band;
  band.reserve(n_trials);
  for (int k = 1; k <= n_trials; ++k) {
    const boost::math::beta_distribution<double> dist(
        static_cast<double>(k), static_cast<double>(n_trials - k + 1));
    band.emplace_back(boost::math::quantile(dist, tail),
                      boost::math::quantile(dist, 1.0 - tail));
  }
  return band;
}

double beta_band_coverage(std::span<const double> percentiles, double level) {
  std::vector<double> sorted(percentiles.begin(), percentiles.end());
  std::sort(sorted.begin(), sorted.end());
  const auto band = beta_credible_band(static_cast<int>(sorted.size()), level);
  std::size_t inside = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k] >= band[k].first && sorted[k] <= band[k].second) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(sorted.size());
}

double js_divergence(const DensityGrid& p, const DensityGrid& q) {
  if (p.points != q.points) {
    throw std::domain_error("js_divergence: grids are not aligned");
  }
  const auto density = [](const DensityGrid& g, std::size_t i) {
    return is_log_zero(g.log_values[i]) ? 0.0 : std::exp(g.log_values[i]);
  };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const double h = p.points[i + 1] - p.points[i];
    double ends[2] = {0.0, 0.0};
    for (int e = 0; e < 2; ++e) {
      const std::size_t idx = i + e;
      const double pv = density(p, idx);
      const double qv = density(q, idx);
      const double m = 0.5 * (pv + qv);
      double term = 0.0;
      if (pv > 0.0 && m > 0.0) term += 0.5 * pv * std::log(pv / m);
      if (qv > 0.0 && m > 0.0) term += 0.5 * qv * std::log(qv / m);
      ends[e] = term;
    }
    acc += 0.5 * h * (ends[0] + ends[1]);
  }
  return acc;
}

PriorBox default_theta_prior() {
  return PriorBox{{{"mu_obs", -20.0, 20.0}, {"sigma_obs", 0.01, 20.0}}};
}

PriorBox default_lambda_prior() {
  return PriorBox{{{"mu_lambda", -20.0, 20.0}, {"sigma_lambda", 0.01, 20.0}}};
}

PosteriorSamples fit_observed_gaussian(const Catalog& cat,
                                       const SamplerConfig& config) {
  const DataSummary summary = cat.homoscedastic() ? summarize(cat) : DataSummary{};
  const bool fast = cat.homoscedastic();
  const double sigma_0 = cat.events.empty() ? 1.0 : cat.events.front().noise_sd;
  const LogDensityFn loglike = [&cat, summary, fast,
                                sigma_0](std::span<const double> x) {
    const GaussianObserved theta{x[0], x[1]};
    return fast ? loglike_observed_gaussian(summary, sigma_0, theta)
                : detail::loglike_observed_gaussian_scan(cat, theta);
  };
  return sample_posterior(loglike, default_theta_prior(), config);
}

PosteriorSamples fit_observed_truncated(const Catalog& cat, double lower,
                                        const SamplerConfig& config) {
  const LogDensityFn loglike = [&cat, lower](std::span<const double> x) {
    return loglike_observed_truncnorm(cat, TruncatedObserved{x[0], x[1], lower});
  };
  PriorBox prior{{{"mean", -20.0, 20.0}, {"sd", 0.01, 20.0}}};
  return sample_posterior(loglike, prior, config);
}

PosteriorSamples fit_intrinsic(const Catalog& cat, const SelectionFunction& sel,
                               LikelihoodMode mode,
                               const SamplerConfig& config) {
  const bool fast =
      cat.homoscedastic() && std::holds_alternative<GaussianSelection>(sel);
  const DataSummary summary = fast ? summarize(cat) : DataSummary{};
  const double sigma_0 = cat.events.empty() ? 1.0 : cat.events.front().noise_sd;
  const LogDensityFn loglike = [&cat, &sel, summary, fast, sigma_0,
                                mode](std::span<const double> x) {
    const IntrinsicModel intr{x[0], x[1]};
    try {
      if (fast) {
        return loglike_inlikelihood_gaussian(
            summary, sigma_0, intr, std::get<GaussianSelection>(sel), mode);
      }
      return loglike_inlikelihood_gaussian(cat, intr, sel, mode);
    } catch (const ImpracticalSelectionError&) {
      return log_zero();
    }
  };
  return sample_posterior(loglike, default_lambda_prior(), config);
}

PPResult run_pp_trials(const PopulationPreset& preset, const PPConfig& config) {
  if (config.n_trials < 10) {
    throw std::domain_error("run_pp_trials: need at least 10 trials");
  }
  const std::vector<std::pair<std::string, double>> truth = {
      {"mu_lambda", preset.intrinsic.mu_lambda},
      {"sigma_lambda", preset.intrinsic.sigma_lambda}};

  struct TrialOutcome {
    bool ok = false;
    double pct_mu = 0.0;
    double pct_sigma = 0.0;
  };
  std::vector<TrialOutcome> outcomes(config.n_trials);

  const RngStream root(config.seed, 0);
  const auto run_trial = [&](int t) {
    RngStream cat_rng = root.split(2 * static_cast<std::uint64_t>(t));
    const std::uint64_t fit_stream =
        root.split(2 * static_cast<std::uint64_t>(t) + 1).stream_id();
    Catalog cat = draw_catalog_bernoulli(
        preset.intrinsic, SelectionFunction{preset.selection},
        static_cast<std::size_t>(config.n_events), preset.sigma_0, cat_rng);
    SamplerConfig fit_config = config.sampler;
    fit_config.seed = config.seed;
    fit_config.stream = fit_stream;

    PosteriorSamples lambda_samples;
    if (config.pipeline == Pipeline::post_process) {
      PosteriorSamples theta = fit_observed_gaussian(cat, fit_config);
      if (!theta.diag.converged) return TrialOutcome{};
      lambda_samples = remap_samples(theta, preset.selection);
      // A remap that loses a meaningful fraction of draws distorts the
      // percentile; treat it like a convergence failure.
      const double dropped =
          static_cast<double>(lambda_samples.diag.n_infeasible_dropped);
      if (dropped > 0.05 * static_cast<double>(theta.n_draws())) {
        return TrialOutcome{};
      }
    } else {
      lambda_samples =
          fit_intrinsic(cat, SelectionFunction{preset.selection},
                        LikelihoodMode::threshold_on_parameters, fit_config);
      if (!lambda_samples.diag.converged) return TrialOutcome{};
    }
    const std::vector<double> pct = percentile_of_truth(lambda_samples, truth);
    return TrialOutcome{true, pct[0], pct[1]};
  };

  int n_threads = config.n_threads > 0
                      ? config.n_threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, config.n_trials));
  std::atomic<int> next{0};
  const auto worker = [&]() {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= config.n_trials) return;
      outcomes[t] = run_trial(t);
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  PPResult result;
  result.parameter_names = {"mu_lambda", "sigma_lambda"};
  result.percentiles.assign(2, {});
  for (const TrialOutcome& o : outcomes) {
    if (!o.ok) {
      ++result.n_excluded;
      continue;
    }
    result.percentiles[0].push_back(o.pct_mu);
    result.percentiles[1].push_back(o.pct_sigma);
  }
  if (result.percentiles[0].size() < 10) {
    throw std::runtime_error("run_pp_trials: too few trials survived");
  }
  result.ks.push_back(ks_uniformity_test(result.percentiles[0]));
  result.ks.push_back(ks_uniformity_test(result.percentiles[1]));
  result.uniformity_pass =
      result.ks[0].p_value > 0.01 && result.ks[1].p_value > 0.01 &&
      result.n_excluded <= 0.05 * static_cast<double>(config.n_trials);
  return result;
}

}  // namespace popsel
