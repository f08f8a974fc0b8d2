#pragma once

#include <string>
#include <string_view>

namespace tmsharp {

enum class Geometry { PlaneCritical, DiskCritical };

inline std::string to_string(Geometry g) {
  return g == Geometry::PlaneCritical ? "plane" : "disk";
}

/// Accepts "plane" or "disk"; throws std::invalid_argument otherwise.
Geometry parse_geometry(std::string_view name);

}  // namespace tmsharp
