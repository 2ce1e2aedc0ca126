#pragma once

namespace kita {

inline constexpr const char* version = "0.1.0";

}  // namespace kita
