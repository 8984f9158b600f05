#pragma once

namespace hullnet {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kNetworkSchemaVersion = 1;

}  // namespace hullnet
