#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "popsel/dpgmm.hpp"
#include "popsel/sampler.hpp"
#include "popsel/simulate.hpp"
#include "popsel/validate.hpp"

namespace popsel::io {

// All CSVs: '.' decimal point, comma separator, one header row. Doubles
// are written with "%.17g" so replays are byte-identical and values
// round-trip exactly.
std::string format_double(double v);

/// "<stem>.meta.json" next to the primary output.
std::filesystem::path sidecar_path(const std::filesystem::path& primary);

void write_metadata(const std::filesystem::path& primary,
                    const nlohmann::json& meta);

// Catalog: columns true_value,observed_value,noise_sd.
void write_catalog_csv(const std::filesystem::path& path, const Catalog& cat);
Catalog read_catalog_csv(const std::filesystem::path& path);

// Posterior samples: named parameter columns then log_posterior.
void write_samples_csv(const std::filesystem::path& path,
                       const PosteriorSamples& samples);
PosteriorSamples read_samples_csv(const std::filesystem::path& path);

// Density grid: columns point,density (linear density).
void write_grid_csv(const std::filesystem::path& path, const DensityGrid& grid);

// Density draws: point,median,p05,p95 and per-draw columns when asked.
void write_draws_csv(const std::filesystem::path& path,
                     const DensityDraws& draws, bool include_draws = false);

// PP result: columns trial,parameter,percentile.
void write_pp_csv(const std::filesystem::path& path, const PPResult& result);

nlohmann::json samples_metadata(const PosteriorSamples& samples);

}  // namespace popsel::io
