#include "popsel/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "popsel/errors.hpp"
#include "popsel/stats.hpp"

namespace popsel {

bool PriorBox::contains(std::span<const double> x) const {
  if (x.size() != params.size()) return false;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (x[i] < params[i].lower || x[i] > params[i].upper) return false;
  }
  return true;
}

void PriorBox::validate() const {
  if (params.empty()) throw std::domain_error("PriorBox: no parameters");
  for (const auto& p : params) {
    if (!(p.lower < p.upper)) {
      throw std::domain_error("PriorBox: lower must be < upper for " + p.name);
    }
  }
}

std::vector<double> PosteriorSamples::column(std::size_t param) const {
  std::vector<double> out;
  out.reserve(n_draws());
  for (std::size_t i = 0; i < n_draws(); ++i) out.push_back(at(i, param));
  return out;
}

std::size_t PosteriorSamples::param_index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw std::domain_error("PosteriorSamples: no parameter named " +
                          std::string(name));
}

namespace {

double safe_logpost(const LogDensityFn& loglike, const PriorBox& prior,
                    std::span<const double> x) {
  if (!prior.contains(x)) return log_zero();
  const double ll = loglike(x);
  if (std::isnan(ll)) {
    throw std::domain_error("sample_posterior: log-likelihood returned NaN");
  }
  return std::isfinite(ll) ? ll : log_zero();
}

}  // namespace

PosteriorSamples sample_posterior(const LogDensityFn& loglike,
                                  const PriorBox& prior,
                                  const SamplerConfig& config) {
  prior.validate();
  const std::size_t dim = prior.dim();
  const int n_walkers = config.n_walkers;
  if (n_walkers < 4 || n_walkers % 2 != 0) {
    throw std::domain_error("sample_posterior: need an even n_walkers >= 4");
  }
  if (config.n_steps < 2) {
    throw std::domain_error("sample_posterior: n_steps must be >= 2");
  }
  const int n_burn =
      config.n_burn >= 0 ? config.n_burn : config.n_steps / 2;
  if (n_burn >= config.n_steps) {
    throw std::domain_error("sample_posterior: burn-in swallows every step");
  }
  const double a = config.stretch_scale;
  if (!(a > 1.0)) {
    throw std::domain_error("sample_posterior: stretch scale must be > 1");
  }

  RngStream rng(config.seed, config.stream);

  // Walker initialisation: uniform in the box, retried per walker until the
  // log-posterior is finite.
  std::vector<std::vector<double>> pos(n_walkers, std::vector<double>(dim));
  std::vector<double> lp(n_walkers);
  constexpr int kInitTries = 200;
  for (int w = 0; w < n_walkers; ++w) {
    bool ok = false;
    for (int attempt = 0; attempt < kInitTries && !ok; ++attempt) {
      for (std::size_t d = 0; d < dim; ++d) {
        pos[w][d] = rng.uniform(prior.params[d].lower, prior.params[d].upper);
      }
      lp[w] = safe_logpost(loglike, prior, pos[w]);
      ok = !is_log_zero(lp[w]);
    }
    if (!ok) {
      throw SamplerInitError(
          "sample_posterior: no finite log-posterior found for the initial "
          "ensemble");
    }
  }

  PosteriorSamples out;
  out.names.reserve(dim);
  for (const auto& p : prior.params) out.names.push_back(p.name);
  out.n_params = dim;
  const std::size_t n_keep =
      static_cast<std::size_t>(config.n_steps - n_burn) * n_walkers;
  out.draws.reserve(n_keep * dim);
  out.log_posterior.reserve(n_keep);

  std::uint64_t n_accept = 0;
  std::uint64_t n_prop = 0;
  std::vector<double> proposal(dim);

  for (int step = 0; step < config.n_steps; ++step) {
    // Two half-ensemble batches: each walker stretches against a
    // complementary-half partner chosen fresh every move.
    for (int half = 0; half < 2; ++half) {
      const int lo = half == 0 ? 0 : n_walkers / 2;
      const int hi = half == 0 ? n_walkers / 2 : n_walkers;
      const int other_lo = half == 0 ? n_walkers / 2 : 0;
      for (int w = lo; w < hi; ++w) {
        const int partner =
            other_lo + static_cast<int>(rng.uniform_index(n_walkers / 2));
        // z ~ g(z) propto 1/sqrt(z) on [1/a, a].
        const double u = rng.uniform();
        const double z = (1.0 + (a - 1.0) * u) * (1.0 + (a - 1.0) * u) / a;
        for (std::size_t d = 0; d < dim; ++d) {
          proposal[d] = pos[partner][d] + z * (pos[w][d] - pos[partner][d]);
        }
        const double lp_new = safe_logpost(loglike, prior, proposal);
        ++n_prop;
        double log_accept = log_zero();
        if (!is_log_zero(lp_new)) {
          log_accept = (static_cast<double>(dim) - 1.0) * std::log(z) +
                       lp_new - lp[w];
        }
        if (log_accept >= 0.0 ||
            (!is_log_zero(log_accept) &&
             std::log(rng.uniform_pos()) < log_accept)) {
          pos[w] = proposal;
          lp[w] = lp_new;
          ++n_accept;
        }
      }
    }
    if (step >= n_burn) {
      for (int w = 0; w < n_walkers; ++w) {
        out.draws.insert(out.draws.end(), pos[w].begin(), pos[w].end());
        out.log_posterior.push_back(lp[w]);
      }
    }
  }

  out.diag.n_walkers = n_walkers;
  out.diag.acceptance_rate =
      n_prop == 0 ? 0.0 : static_cast<double>(n_accept) / n_prop;
  out.diag.ess = out.n_draws() >= 100 ? effective_sample_size(out)
                                      : std::vector<double>(dim, 0.0);
  out.diag.converged =
      std::all_of(out.diag.ess.begin(), out.diag.ess.end(),
                  [&](double e) { return e >= config.ess_floor; });
  return out;
}

PosteriorSamples remap_samples(const PosteriorSamples& samples,
                               const GaussianSelection& sel) {
  const std::size_t i_mu = samples.param_index("mu_obs");
  const std::size_t i_sigma = samples.param_index("sigma_obs");

  PosteriorSamples out;
  out.names = {"mu_lambda", "sigma_lambda"};
  out.n_params = 2;
  out.diag = samples.diag;
  out.diag.ess.clear();

  for (std::size_t i = 0; i < samples.n_draws(); ++i) {
    const GaussianObserved theta{samples.at(i, i_mu), samples.at(i, i_sigma)};
    if (theta.sigma_obs >= sel.sigma_d) {
      ++out.diag.n_infeasible_dropped;
      continue;
    }
    const IntrinsicModel intr = lambda_of_theta(theta, sel);
    out.draws.push_back(intr.mu_lambda);
    out.draws.push_back(intr.sigma_lambda);
    // Log-posterior of the generating Theta draw, carried through for
    // reference; it is not re-weighted by the map Jacobian.
    out.log_posterior.push_back(samples.log_posterior[i]);
  }
  if (out.n_draws() == 0) {
    throw RemapFailureError("remap_samples: every draw was infeasible");
  }
  return out;
}

namespace {

// Mean per-walker autocorrelation time by Geyer's initial positive
// sequence, in units of steps.
double autocorr_time(const PosteriorSamples& s, std::size_t param) {
  const int n_walkers = std::max(1, s.diag.n_walkers);
  const std::size_t n_draws = s.n_draws();
  const std::size_t n_steps = n_draws / n_walkers;
  if (n_steps < 4) return 1.0;

  std::vector<double> series(n_steps);
  std::vector<double> mean_rho;  // averaged over walkers
  for (int w = 0; w < n_walkers; ++w) {
    for (std::size_t t = 0; t < n_steps; ++t) {
      series[t] = s.at(t * n_walkers + w, param);
    }
    const MeanSs ms = mean_and_sumsq(series);
    if (ms.centered_sumsq <= 0.0) return 0.0;  // constant chain sentinel
    const std::size_t max_lag = n_steps / 2;
    if (mean_rho.empty()) mean_rho.assign(max_lag, 0.0);
    for (std::size_t lag = 0; lag < max_lag; ++lag) {
      double acc = 0.0;
      for (std::size_t t = 0; t + lag < n_steps; ++t) {
        acc += (series[t] - ms.mean) * (series[t + lag] - ms.mean);
      }
      mean_rho[lag] += acc / ms.centered_sumsq / n_walkers;
    }
  }

  double tau = 1.0;
  for (std::size_t lag = 1; lag < mean_rho.size(); ++lag) {
    if (mean_rho[lag] <= 0.0) break;
    tau += 2.0 * mean_rho[lag];
  }
  return tau;
}

}  // namespace

std::vector<double> effective_sample_size(const PosteriorSamples& samples) {
  if (samples.n_draws() < 100) {
    throw std::domain_error("effective_sample_size: need >= 100 draws");
  }
  std::vector<double> ess(samples.n_params);
  for (std::size_t p = 0; p < samples.n_params; ++p) {
    const double tau = autocorr_time(samples, p);
    ess[p] = tau <= 0.0 ? 0.0
                        : static_cast<double>(samples.n_draws()) / tau;
  }
  return ess;
}

}  // namespace popsel
