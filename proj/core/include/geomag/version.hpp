#pragma once

namespace geomag {

inline constexpr const char* kVersion = "0.1.0";

} // namespace geomag
