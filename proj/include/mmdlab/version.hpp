#pragma once

namespace mmdlab {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kSchemaVersion = "mmdlab-report-v1";

}  // namespace mmdlab
