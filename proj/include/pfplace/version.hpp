#pragma once

namespace pfplace {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pfplace
