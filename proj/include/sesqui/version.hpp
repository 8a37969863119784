#pragma once

namespace sesqui {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sesqui
