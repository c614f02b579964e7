#pragma once

namespace specshift {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace specshift
