#pragma once

#include <stdexcept>
#include <string>

namespace popsel {

/// Observed-model parameters lie outside the image of the intrinsic
/// parameter space (deconvolved variance would be non-positive).
struct InfeasibleParametersError : std::runtime_error {
  explicit InfeasibleParametersError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Detection probability marginalised over the population is so small
/// that rejection sampling (or the 1/alpha correction) is meaningless.
struct ImpracticalSelectionError : std::runtime_error {
  explicit ImpracticalSelectionError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A grid operation left no point with usable support.
struct EmptySupportError : std::runtime_error {
  explicit EmptySupportError(const std::string& what)
      : std::runtime_error(what) {}
};

/// The sampler could not find a finite log-posterior for any walker.
struct SamplerInitError : std::runtime_error {
  explicit SamplerInitError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Every draw of a posterior-sample set was infeasible under a remap.
struct RemapFailureError : std::runtime_error {
  explicit RemapFailureError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A fit finished without reaching its effective-sample-size floor.
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace popsel
