#pragma once

namespace qwlab {

inline constexpr const char* version = "1.0.0";

}  // namespace qwlab
