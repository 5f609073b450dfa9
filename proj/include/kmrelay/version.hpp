#pragma once

namespace kmrelay {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kmrelay
