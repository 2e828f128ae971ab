#pragma once

namespace dblend {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dblend
