#pragma once

namespace cerebra {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cerebra
