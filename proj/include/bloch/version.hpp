#pragma once

namespace bloch {

inline constexpr const char* kToolName = "blochband";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace bloch
