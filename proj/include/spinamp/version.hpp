#pragma once

namespace spinamp {

inline constexpr const char* version = "0.1.0";

}  // namespace spinamp
