#ifndef LCR_CCL_HPP_
#define LCR_CCL_HPP_

#include <cstdint>
#include <vector>

#include "lcr/raster.hpp"

namespace lcr {

enum class Connectivity { four, eight };

// Per-pixel labels, 0 = background, components numbered 1..count in order
// of their first pixel in row-major scan.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> labels;
  std::uint32_t count = 0;

  std::uint32_t at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

struct ComponentStats {
  std::uint32_t label = 0;
  std::size_t area = 0;
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  double centroid_x = 0.0, centroid_y = 0.0;
};

struct Labeling {
  LabelMap map;
  std::vector<ComponentStats> stats;  // stats[i].label == i + 1
};

// Build-time filter settings shared by corpus generation and inspection.
struct CcSettings {
  Connectivity connectivity = Connectivity::eight;
  double area_fraction = 0.04;
};

// Two raster scans: provisional labels with union-find equivalences
// (path compression, union by rank), then root compaction plus stats.
Labeling two_pass_label(const Raster& raster,
                        Connectivity conn = Connectivity::eight);

// Breadth-first reference labeling with the same numbering rule.
// Independent of two_pass_label; used as a test oracle.
LabelMap flood_fill_label(const Raster& raster,
                          Connectivity conn = Connectivity::eight);

// Clears every component whose area is strictly below
// area_fraction * (largest component area).
Raster strip_small_components(const Raster& raster, Connectivity conn,
                              double area_fraction);

bool is_single_component(const Raster& raster,
                         Connectivity conn = Connectivity::eight);

}  // namespace lcr

#endif  // LCR_CCL_HPP_
