#pragma once

namespace densesr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace densesr
