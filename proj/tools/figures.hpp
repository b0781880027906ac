#pragma once

#include <cstdint>
#include <filesystem>

namespace popsel::figures {

// Emit the data behind one of the six paper-style figures as CSV files in
// out_dir (plus a metadata sidecar per file). Returns 0 on success, 2 on a
// numerical/convergence failure.
int reproduce(int figure, const std::filesystem::path& out_dir,
              std::uint64_t seed, int threads);

}  // namespace popsel::figures
