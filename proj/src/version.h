#pragma once

namespace conevortex {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace conevortex
