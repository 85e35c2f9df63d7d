#include "soundscape/seg_features.hpp"

#include "soundscape/errors.hpp"

namespace soundscape {

ClassDistribution class_distribution(const LabelRaster& raster) {
  const std::size_t total = raster.width * raster.height;
  if (total == 0) throw ArgumentError("cannot compute class proportions of an empty raster");
  if (raster.cells.size() != total) {
    throw FormatError("raster holds " + std::to_string(raster.cells.size()) +
                      " cells but declares " + std::to_string(raster.width) + "x" +
                      std::to_string(raster.height));
  }

  std::map<int, std::size_t> counts;
  for (const auto& entry : raster.legend) counts.emplace(entry.first, 0);
  for (int id : raster.cells) {
    auto it = counts.find(id);
    if (it == counts.end()) {
      throw FormatError("cell id " + std::to_string(id) + " is missing from the legend");
    }
    ++it->second;
  }

  // Several ids may share one name; merge their counts before dividing so the
  // proportions still sum to one.
  std::map<std::string, std::size_t> by_name;
  for (const auto& [id, n] : counts) by_name[raster.legend.at(id)] += n;

  ClassDistribution dist;
  dist.total_pixels = total;
  for (const auto& [name, n] : by_name) {
    dist.proportions.emplace(name, static_cast<double>(n) / static_cast<double>(total));
  }
  return dist;
}

}  // namespace soundscape
