#pragma once

namespace ousynth {

inline constexpr const char* kVersion = "0.1.0";

// Bumped whenever a persisted JSON layout changes incompatibly.
inline constexpr int kSchemaVersion = 1;

}  // namespace ousynth
