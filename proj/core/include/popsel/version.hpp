#pragma once

namespace popsel {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace popsel
