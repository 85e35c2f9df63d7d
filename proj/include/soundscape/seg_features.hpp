#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "soundscape/feature_store.hpp"

namespace soundscape {

/// Pixel share per class name. Legend classes absent from the raster are kept
/// with proportion 0.
struct ClassDistribution {
  std::map<std::string, double> proportions;
  std::size_t total_pixels = 0;

  double operator[](const std::string& name) const {
    auto it = proportions.find(name);
    return it == proportions.end() ? 0.0 : it->second;
  }
  bool operator==(const ClassDistribution&) const = default;
};

ClassDistribution class_distribution(const LabelRaster& raster);

}  // namespace soundscape
