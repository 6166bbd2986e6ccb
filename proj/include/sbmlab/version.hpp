#pragma once

namespace sbmlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sbmlab
