#pragma once

namespace advbench {

inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace advbench
