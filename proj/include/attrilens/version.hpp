#pragma once

namespace attrilens {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace attrilens
