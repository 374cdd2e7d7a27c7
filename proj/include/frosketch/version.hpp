#pragma once

namespace frosketch {

inline constexpr const char* kVersion = "0.1.0";

} // namespace frosketch
