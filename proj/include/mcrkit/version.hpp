#pragma once

namespace mcr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mcr
