#pragma once

namespace tailspectra {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tailspectra
