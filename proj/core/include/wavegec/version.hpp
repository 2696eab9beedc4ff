#pragma once

namespace wavegec {
inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "wavegec";
}  // namespace wavegec
