#pragma once

namespace subvec {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace subvec
