#include "popsel/dpgmm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/gamma.hpp>

#include "popsel/errors.hpp"
#include "popsel/stats.hpp"

namespace popsel {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void check_hyper(const NIGHyper& h) {
  if (!(h.k0 > 0.0) || !(h.a0 > 1.0) || !(h.b0 > 0.0)) {
    throw std::domain_error("NIGHyper: need k0 > 0, a0 > 1, b0 > 0");
  }
}

struct NIGPosterior {
  double kn, mn, an, bn;
};

NIGPosterior nig_update(const NIGHyper& h, int n, double mean, double ss) {
  NIGPosterior p;
  const double nd = static_cast<double>(n);
  p.kn = h.k0 + nd;
  p.mn = (h.k0 * h.m0 + nd * mean) / p.kn;
  p.an = h.a0 + 0.5 * nd;
  const double dm = mean - h.m0;
  p.bn = h.b0 + 0.5 * ss + 0.5 * h.k0 * nd * dm * dm / p.kn;
  return p;
}

// Draw (mu, v) from the NIG conditional restricted to v > sigma0^2, by the
// inverse-CDF transform on the precision (no rejection loop, so RNG
// consumption is one uniform plus one normal regardless of parameters).
void sample_trunc_nig(const NIGPosterior& p, double sigma0_sq, RngStream& rng,
                      double& mu, double& v) {
  const boost::math::gamma_distribution<double> g(p.an, 1.0 / p.bn);
  const double f_cap = sigma0_sq > 0.0
                           ? boost::math::cdf(g, 1.0 / sigma0_sq)
                           : 1.0;
  if (!(f_cap > 1e-300)) {
    throw std::domain_error(
        "dpgmm: component variance prior has no mass above the noise "
        "variance");
  }
  const double u = rng.uniform_pos();
  const double tau = boost::math::quantile(g, u * f_cap);
  v = tau > 0.0 ? 1.0 / tau : std::numeric_limits<double>::max();
  if (v <= sigma0_sq) v = sigma0_sq * (1.0 + 1e-12) + 1e-300;
  mu = rng.normal(p.mn, std::sqrt(v / p.kn));
}

double log_alpha_component(double mu, double sd, const SelectionFunction& sel) {
  const double alpha = alpha_of_lambda(IntrinsicModel{mu, sd}, sel,
                                       SelectionScale::unit_peak);
  return alpha > 0.0 ? std::log(alpha) : log_zero();
}

}  // namespace

NIGHyper empirical_hyper(const Catalog& cat) {
  if (cat.events.empty()) throw std::domain_error("empirical_hyper: empty catalog");
  const std::vector<double> obs = cat.observed_values();
  const MeanSs ms = mean_and_sumsq(obs);
  NIGHyper h;
  h.m0 = ms.mean;
  h.k0 = 0.01;
  h.a0 = 2.0;
  h.b0 = obs.size() > 1
             ? ms.centered_sumsq / static_cast<double>(obs.size() - 1)
             : 1.0;
  if (!(h.b0 > 0.0)) h.b0 = 1.0;
  return h;
}

int MixtureState::n_active() const {
  int k = 0;
  for (int c : counts) k += c > 0 ? 1 : 0;
  return k;
}

double MixtureState::component_sd(int j) const {
  const double var = conv_vars[j] - sigma0 * sigma0;
  return std::sqrt(std::max(var, 1e-24));
}

void MixtureState::check_consistent(std::size_t n_events) const {
  if (z.size() != n_events) {
    throw std::domain_error("MixtureState: label count != event count");
  }
  const std::size_t k = static_cast<std::size_t>(k_max);
  if (counts.size() != k || means.size() != k || conv_vars.size() != k ||
      weights.size() != k) {
    throw std::domain_error("MixtureState: component arrays out of shape");
  }
  long total = 0;
  for (int c : counts) total += c;
  if (total != static_cast<long>(n_events)) {
    throw std::domain_error("MixtureState: counts do not sum to event count");
  }
}

MixtureState init_mixture_state(const Catalog& cat, const NIGHyper& hyper,
                                int k_max, double concentration,
                                RngStream& rng) {
  if (cat.events.empty()) {
    throw std::domain_error("init_mixture_state: empty catalog");
  }
  if (!cat.homoscedastic()) {
    throw std::domain_error(
        "init_mixture_state: the conjugate sweep needs a common noise sd");
  }
  check_hyper(hyper);
  if (k_max < 1) throw std::domain_error("init_mixture_state: k_max < 1");
  if (!(concentration > 0.0)) {
    throw std::domain_error("init_mixture_state: concentration <= 0");
  }

  MixtureState st;
  st.hyper = hyper;
  st.sigma0 = cat.events.front().noise_sd;
  st.k_max = k_max;
  st.concentration = concentration;
  st.z.assign(cat.size(), 0);
  st.counts.assign(k_max, 0);
  st.counts[0] = static_cast<int>(cat.size());
  st.means.resize(k_max);
  st.conv_vars.resize(k_max);
  const double s0sq = st.sigma0 * st.sigma0;
  const NIGPosterior prior{hyper.k0, hyper.m0, hyper.a0, hyper.b0};
  for (int j = 0; j < k_max; ++j) {
    sample_trunc_nig(prior, s0sq, rng, st.means[j], st.conv_vars[j]);
  }
  std::vector<double> conc(k_max, concentration / k_max);
  conc[0] += static_cast<double>(cat.size());
  st.weights = dirichlet_sample(conc, rng);
  return st;
}

void gibbs_sweep(MixtureState& st, const Catalog& cat,
                 const std::optional<SelectionFunction>& sel, RngStream& rng) {
  if (cat.events.empty()) throw std::domain_error("gibbs_sweep: empty catalog");
  st.check_consistent(cat.size());
  const int k = st.k_max;
  const double a_over_k = st.concentration / static_cast<double>(k);
  const double s0sq = st.sigma0 * st.sigma0;

  // (1) Collapsed reassignment. Weight for component j is
  // (N_j^{-i} + a/K) * N(obs_i | mu_j, sqrt(v_j)); empty components are the
  // "new component" options, carrying fresh prior draws from the previous
  // sweep.
  std::vector<double> log_norm(k), inv_2v(k);
  for (int j = 0; j < k; ++j) {
    log_norm[j] = -0.5 * std::log(st.conv_vars[j]) - kLogSqrt2Pi;
    inv_2v[j] = 0.5 / st.conv_vars[j];
  }
  std::vector<double> logw(k), w(k);
  for (std::size_t i = 0; i < cat.size(); ++i) {
    const double x = cat.events[i].observed_value;
    --st.counts[st.z[i]];
    double m = log_zero();
    for (int j = 0; j < k; ++j) {
      const double d = x - st.means[j];
      logw[j] = std::log(st.counts[j] + a_over_k) + log_norm[j] -
                d * d * inv_2v[j];
      m = std::max(m, logw[j]);
    }
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
      w[j] = std::exp(logw[j] - m);
      total += w[j];
    }
    double target = rng.uniform() * total;
    int pick = k - 1;
    for (int j = 0; j < k; ++j) {
      target -= w[j];
      if (target <= 0.0) {
        pick = j;
        break;
      }
    }
    st.z[i] = pick;
    ++st.counts[pick];
  }

  // (2) Component parameter updates from per-component data moments.
  std::vector<double> sums(k, 0.0);
  for (std::size_t i = 0; i < cat.size(); ++i) {
    sums[st.z[i]] += cat.events[i].observed_value;
  }
  std::vector<double> comp_mean(k, 0.0), comp_ss(k, 0.0);
  for (int j = 0; j < k; ++j) {
    if (st.counts[j] > 0) comp_mean[j] = sums[j] / st.counts[j];
  }
  for (std::size_t i = 0; i < cat.size(); ++i) {
    const double d = cat.events[i].observed_value - comp_mean[st.z[i]];
    comp_ss[st.z[i]] += d * d;
  }

  for (int j = 0; j < k; ++j) {
    const NIGPosterior post =
        nig_update(st.hyper, st.counts[j], comp_mean[j], comp_ss[j]);
    double mu_prop, v_prop;
    sample_trunc_nig(post, s0sq, rng, mu_prop, v_prop);
    if (sel && st.counts[j] > 0) {
      // Independence Metropolis step: the no-selection conditional is the
      // proposal, so everything cancels except the alpha^[-N_j] targets.
      const double la_cur =
          log_alpha_component(st.means[j], st.component_sd(j), *sel);
      const double sd_prop =
          std::sqrt(std::max(v_prop - s0sq, 1e-24));
      const double la_prop = log_alpha_component(mu_prop, sd_prop, *sel);
      const double log_accept =
          static_cast<double>(st.counts[j]) * (la_cur - la_prop);
      if (log_accept < 0.0 && std::log(rng.uniform_pos()) >= log_accept) {
        continue;  // keep the current component parameters
      }
    }
    st.means[j] = mu_prop;
    st.conv_vars[j] = v_prop;
  }

  // (3) Weights: DD(N + a/K), with counts inflated to N'_j = N_j/alpha_j
  // when a selection function is given ("detection removed a factor
  // alpha_j of this component's members").
  std::vector<double> conc(k);
  for (int j = 0; j < k; ++j) {
    double n_eff = static_cast<double>(st.counts[j]);
    if (sel && st.counts[j] > 0) {
      const double alpha =
          alpha_of_lambda(IntrinsicModel{st.means[j], st.component_sd(j)},
                          *sel, SelectionScale::unit_peak);
      if (alpha < 1e-3) ++st.n_alpha_capped;
      n_eff = selection_inflated_count(n_eff, alpha);
    }
    conc[j] = n_eff + a_over_k;
  }
  st.weights = dirichlet_sample(conc, rng);
}

double selection_inflated_count(double count, double alpha) {
  return count / std::max(alpha, 1e-3);
}

void DensityDraws::recompute_summary() {
  const std::size_t n_pts = points.size();
  median.assign(n_pts, 0.0);
  p05.assign(n_pts, 0.0);
  p95.assign(n_pts, 0.0);
  if (log_draws.empty()) return;
  std::vector<double> column(log_draws.size());
  const auto quantile = [&column](double q) {
    const double pos = q * static_cast<double>(column.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, column.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return column[lo] + frac * (column[hi] - column[lo]);
  };
  for (std::size_t p = 0; p < n_pts; ++p) {
    for (std::size_t d = 0; d < log_draws.size(); ++d) {
      const double lv = log_draws[d][p];
      column[d] = is_log_zero(lv) ? 0.0 : std::exp(lv);
    }
    std::sort(column.begin(), column.end());
    median[p] = quantile(0.5);
    p05[p] = quantile(0.05);
    p95[p] = quantile(0.95);
  }
}

DensityDraws density_draws(const std::vector<MixtureState>& chain,
                           std::span<const double> points, int thin) {
  if (thin < 1) throw std::domain_error("density_draws: thin must be >= 1");
  if (chain.size() < static_cast<std::size_t>(thin)) {
    throw std::domain_error("density_draws: chain shorter than thin");
  }
  if (points.size() < 2) {
    throw std::domain_error("density_draws: need at least 2 grid points");
  }

  DensityDraws out;
  out.points.assign(points.begin(), points.end());
  for (std::size_t s = 0; s < chain.size(); s += thin) {
    const MixtureState& st = chain[s];
    const int k = st.k_max;
    std::vector<double> log_w(k), sds(k);
    for (int j = 0; j < k; ++j) {
      log_w[j] = st.weights[j] > 0.0 ? std::log(st.weights[j]) : log_zero();
      sds[j] = st.component_sd(j);
    }
    DensityGrid grid;
    grid.points = out.points;
    grid.log_values.resize(out.points.size());
    std::vector<double> terms(k);
    for (std::size_t p = 0; p < out.points.size(); ++p) {
      for (int j = 0; j < k; ++j) {
        terms[j] = is_log_zero(log_w[j])
                       ? log_zero()
                       : log_w[j] +
                             gaussian_logpdf(out.points[p], st.means[j], sds[j]);
      }
      grid.log_values[p] = logsumexp(terms);
    }
    normalize_grid(grid);
    out.log_draws.push_back(std::move(grid.log_values));
  }
  out.recompute_summary();
  return out;
}

DensityDraws postprocess_intrinsic(const DensityDraws& draws,
                                   const SelectionFunction& sel,
                                   double floor_frac) {
  DensityDraws out;
  out.points = draws.points;
  out.log_draws.reserve(draws.log_draws.size());
  for (const auto& log_draw : draws.log_draws) {
    DensityGrid grid;
    grid.points = draws.points;
    grid.log_values = log_draw;
    IntrinsicGridResult divided =
        intrinsic_from_observed_grid(grid, sel, floor_frac);
    out.log_draws.push_back(std::move(divided.grid.log_values));
  }
  out.recompute_summary();
  return out;
}

DensityDraws render_posterior_densities(
    const PosteriorSamples& samples,
    const std::function<double(std::span<const double>, double)>& log_density,
    std::span<const double> points, int thin) {
  if (thin < 1) {
    throw std::domain_error("render_posterior_densities: thin must be >= 1");
  }
  if (samples.n_draws() == 0) {
    throw std::domain_error("render_posterior_densities: no draws");
  }
  DensityDraws out;
  out.points.assign(points.begin(), points.end());
  for (std::size_t i = 0; i < samples.n_draws();
       i += static_cast<std::size_t>(thin)) {
    DensityGrid grid;
    grid.points = out.points;
    grid.log_values.resize(out.points.size());
    const auto row = samples.row(i);
    for (std::size_t p = 0; p < out.points.size(); ++p) {
      grid.log_values[p] = log_density(row, out.points[p]);
    }
    normalize_grid(grid);
    out.log_draws.push_back(std::move(grid.log_values));
  }
  out.recompute_summary();
  return out;
}

std::vector<MixtureState> run_dpgmm_chain(
    const Catalog& cat, const std::optional<SelectionFunction>& sel,
    const DpgmmConfig& config, RngStream& rng) {
  if (config.n_burn < 0 || config.n_burn >= config.n_sweeps) {
    throw std::domain_error("run_dpgmm_chain: bad burn-in");
  }
  MixtureState st = init_mixture_state(cat, empirical_hyper(cat),
                                       config.k_max, config.concentration,
                                       rng);
  std::vector<MixtureState> kept;
  kept.reserve(config.n_sweeps - config.n_burn);
  for (int sweep = 0; sweep < config.n_sweeps; ++sweep) {
    gibbs_sweep(st, cat, sel, rng);
    if (sweep >= config.n_burn) kept.push_back(st);
  }
  return kept;
}

}  // namespace popsel
