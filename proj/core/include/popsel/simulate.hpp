#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "popsel/population.hpp"
#include "popsel/rng.hpp"

namespace popsel {

/// One detected event: the latent deviation parameter, the noisy
/// measurement of it, and the known measurement width.
struct Event {
  double true_value = 0.0;
  double observed_value = 0.0;
  double noise_sd = 1.0;
};

struct Catalog {
  std::vector<Event> events;
  /// Intrinsic draws consumed before selection kept `events.size()` of them.
  std::uint64_t n_drawn = 0;
  /// JSON blob with generator name, model parameters and (seed, stream):
  /// enough to regenerate the catalog bit-identically.
  std::string provenance;

  std::size_t size() const { return events.size(); }
  bool homoscedastic() const;
  std::vector<double> observed_values() const;
  std::vector<double> true_values() const;
};

/// Deterministic threshold detection: rho_obs ~ N(slope*theta + offset,
/// stat_noise_sd), kept iff rho_obs >= threshold.
struct ThresholdDetector {
  double rho_opt_slope = 1.0;
  double rho_opt_offset = 0.0;
  double stat_noise_sd = 1.0;
  double threshold = 0.0;
};

// Selection acting on *true* parameters: draw from the intrinsic model,
// keep with probability p_det (unit-peak scale), then add measurement
// noise to the kept draws. Noise is drawn after the keep decision, so
// detection cannot correlate with the measurement error.
// noise_sds, when given, must have length n_detections (heteroscedastic
// catalogs); otherwise every event gets sigma_0.
// Throws ImpracticalSelectionError when alpha(Lambda) < 1e-10.
Catalog draw_catalog_bernoulli(
    const IntrinsicModel& intr, const SelectionFunction& sel,
    std::size_t n_detections, double sigma_0, RngStream& rng,
    const std::optional<std::vector<double>>& noise_sds = std::nullopt);

// Appendix-style detection statistic: each intrinsic draw gets a noisy
// statistic and is kept iff the statistic clears the threshold. Replaying
// the same stream replays the same keep/drop decisions.
Catalog draw_catalog_threshold(
    const IntrinsicModel& intr, const ThresholdDetector& det,
    std::size_t n_detections, double sigma_0, RngStream& rng,
    const std::optional<std::vector<double>>& noise_sds = std::nullopt);

// Negative control only: accepts on the *measured* value, which is not
// consistent with a deterministic threshold detection and biases the
// post-processing path by construction. Kept behind its own entry point so
// the bias can be demonstrated; never a default.
Catalog draw_catalog_bernoulli_on_observed(
    const IntrinsicModel& intr, const SelectionFunction& sel,
    std::size_t n_detections, double sigma_0, RngStream& rng);

/// events / n_drawn. Throws std::domain_error when n_drawn == 0.
double empirical_detection_fraction(const Catalog& cat);

/// Quadrature of the marginal detection probability
/// integral sf((threshold - rho_opt(x)) / stat_noise_sd) * p_int(x) dx.
double detection_fraction_threshold(const IntrinsicModel& intr,
                                    const ThresholdDetector& det);

}  // namespace popsel
