#include "popsel/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "popsel/stats.hpp"

namespace popsel::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path.string());
  }
  return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("malformed number '" + s + "' in " +
                             path.string());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::filesystem::path sidecar_path(const std::filesystem::path& primary) {
  std::filesystem::path p = primary;
  p.replace_extension();
  p += ".meta.json";
  return p;
}

void write_metadata(const std::filesystem::path& primary,
                    const nlohmann::json& meta) {
  auto out = open_out(sidecar_path(primary));
  out << meta.dump(2) << "\n";
}

void write_catalog_csv(const std::filesystem::path& path, const Catalog& cat) {
  auto out = open_out(path);
  out << "true_value,observed_value,noise_sd\n";
  for (const Event& e : cat.events) {
    out << format_double(e.true_value) << ','
        << format_double(e.observed_value) << ','
        << format_double(e.noise_sd) << '\n';
  }
}

Catalog read_catalog_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty catalog file: " + path.string());
  }
  Catalog cat;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw std::runtime_error("catalog row needs 3 columns in " +
                               path.string());
    }
    cat.events.push_back(Event{parse_double(fields[0], path),
                               parse_double(fields[1], path),
                               parse_double(fields[2], path)});
  }
  cat.n_drawn = cat.events.size();  // unknown for external files
  return cat;
}

void write_samples_csv(const std::filesystem::path& path,
                       const PosteriorSamples& samples) {
  auto out = open_out(path);
  for (const auto& name : samples.names) out << name << ',';
  out << "log_posterior\n";
  for (std::size_t i = 0; i < samples.n_draws(); ++i) {
    for (std::size_t p = 0; p < samples.n_params; ++p) {
      out << format_double(samples.at(i, p)) << ',';
    }
    out << format_double(samples.log_posterior[i]) << '\n';
  }
}

PosteriorSamples read_samples_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty samples file: " + path.string());
  }
  auto header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "log_posterior") {
    throw std::runtime_error(
        "samples file must end with a log_posterior column: " + path.string());
  }
  PosteriorSamples samples;
  samples.names.assign(header.begin(), header.end() - 1);
  samples.n_params = samples.names.size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("samples row width mismatch in " +
                               path.string());
    }
    for (std::size_t p = 0; p < samples.n_params; ++p) {
      samples.draws.push_back(parse_double(fields[p], path));
    }
    samples.log_posterior.push_back(parse_double(fields.back(), path));
  }
  if (samples.n_draws() == 0) {
    throw std::runtime_error("no draws in " + path.string());
  }
  return samples;
}

void write_grid_csv(const std::filesystem::path& path, const DensityGrid& grid) {
  auto out = open_out(path);
  out << "point,density\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d =
        is_log_zero(grid.log_values[i]) ? 0.0 : std::exp(grid.log_values[i]);
    out << format_double(grid.points[i]) << ',' << format_double(d) << '\n';
  }
}

void write_draws_csv(const std::filesystem::path& path,
                     const DensityDraws& draws, bool include_draws) {
  auto out = open_out(path);
  out << "point,median,p05,p95";
  if (include_draws) {
    for (std::size_t d = 0; d < draws.log_draws.size(); ++d) {
      out << ",draw_" << d;
    }
  }
  out << '\n';
  for (std::size_t i = 0; i < draws.points.size(); ++i) {
    out << format_double(draws.points[i]) << ','
        << format_double(draws.median[i]) << ','
        << format_double(draws.p05[i]) << ',' << format_double(draws.p95[i]);
    if (include_draws) {
      for (const auto& ld : draws.log_draws) {
        const double v = is_log_zero(ld[i]) ? 0.0 : std::exp(ld[i]);
        out << ',' << format_double(v);
      }
    }
    out << '\n';
  }
}

void write_pp_csv(const std::filesystem::path& path, const PPResult& result) {
  auto out = open_out(path);
  out << "trial,parameter,percentile\n";
  for (std::size_t p = 0; p < result.parameter_names.size(); ++p) {
    for (std::size_t t = 0; t < result.percentiles[p].size(); ++t) {
      out << t << ',' << result.parameter_names[p] << ','
          << format_double(result.percentiles[p][t]) << '\n';
    }
  }
}

nlohmann::json samples_metadata(const PosteriorSamples& samples) {
  return {
      {"n_draws", samples.n_draws()},
      {"parameters", samples.names},
      {"acceptance_rate", samples.diag.acceptance_rate},
      {"ess", samples.diag.ess},
      {"converged", samples.diag.converged},
      {"n_infeasible_dropped", samples.diag.n_infeasible_dropped},
      {"n_walkers", samples.diag.n_walkers},
  };
}

}  // namespace popsel::io
