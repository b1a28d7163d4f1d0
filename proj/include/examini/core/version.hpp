#pragma once

namespace examini {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace examini
