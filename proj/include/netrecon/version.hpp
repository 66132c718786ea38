#pragma once

namespace netrecon {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace netrecon
