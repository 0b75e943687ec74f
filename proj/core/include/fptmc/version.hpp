#pragma once

namespace fptmc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fptmc
