#pragma once

namespace nuctk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nuctk
