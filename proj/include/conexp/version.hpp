#pragma once

namespace conexp {

inline constexpr const char* version = "0.1.0";

}  // namespace conexp
