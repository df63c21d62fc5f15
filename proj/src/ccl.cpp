#include "lcr/ccl.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace lcr {

namespace {

class DisjointSet {
 public:
  std::uint32_t make() {
    auto id = static_cast<std::uint32_t>(parent_.size());
    parent_.push_back(id);
    rank_.push_back(0);
    return id;
  }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> rank_;
};

}  // namespace

Labeling two_pass_label(const Raster& raster, Connectivity conn) {
  const int w = raster.width();
  const int h = raster.height();
  Labeling out;
  out.map.width = w;
  out.map.height = h;
  out.map.labels.assign(raster.size(), 0);
  auto& labels = out.map.labels;

  // Provisional labels are 1-based; index 0 of the set is a dummy.
  DisjointSet sets;
  sets.make();
  const bool eight = conn == Connectivity::eight;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!raster.foreground(x, y)) continue;
      std::uint32_t neighbours[4];
      int n = 0;
      auto take = [&](int nx, int ny) {
        if (nx < 0 || ny < 0 || nx >= w) return;
        std::uint32_t l = labels[static_cast<std::size_t>(ny) * w + nx];
        if (l != 0) neighbours[n++] = l;
      };
      take(x - 1, y);
      take(x, y - 1);
      if (eight) {
        take(x - 1, y - 1);
        take(x + 1, y - 1);
      }
      std::uint32_t& here = labels[static_cast<std::size_t>(y) * w + x];
      if (n == 0) {
        here = sets.make();
      } else {
        here = *std::min_element(neighbours, neighbours + n);
        for (int i = 0; i < n; ++i) sets.unite(here, neighbours[i]);
      }
    }
  }

  std::vector<std::uint32_t> compact(sets.size(), 0);
  std::vector<double> sum_x, sum_y;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint32_t& l = labels[static_cast<std::size_t>(y) * w + x];
      if (l == 0) continue;
      std::uint32_t root = sets.find(l);
      if (compact[root] == 0) {
        compact[root] = ++out.map.count;
        ComponentStats s;
        s.label = compact[root];
        s.min_x = s.max_x = x;
        s.min_y = s.max_y = y;
        out.stats.push_back(s);
        sum_x.push_back(0.0);
        sum_y.push_back(0.0);
      }
      l = compact[root];
      ComponentStats& s = out.stats[l - 1];
      ++s.area;
      s.min_x = std::min(s.min_x, x);
      s.max_x = std::max(s.max_x, x);
      s.max_y = y;
      sum_x[l - 1] += x;
      sum_y[l - 1] += y;
    }
  }
  for (std::size_t i = 0; i < out.stats.size(); ++i) {
    out.stats[i].centroid_x = sum_x[i] / static_cast<double>(out.stats[i].area);
    out.stats[i].centroid_y = sum_y[i] / static_cast<double>(out.stats[i].area);
  }
  return out;
}

LabelMap flood_fill_label(const Raster& raster, Connectivity conn) {
  const int w = raster.width();
  const int h = raster.height();
  LabelMap map{w, h, std::vector<std::uint32_t>(raster.size(), 0), 0};
  std::deque<std::pair<int, int>> queue;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      if (!raster.foreground(x0, y0) ||
          map.labels[static_cast<std::size_t>(y0) * w + x0] != 0)
        continue;
      const std::uint32_t label = ++map.count;
      map.labels[static_cast<std::size_t>(y0) * w + x0] = label;
      queue.emplace_back(x0, y0);
      while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (conn == Connectivity::four && dx != 0 && dy != 0) continue;
            int nx = x + dx, ny = y + dy;
            if (!raster.contains(nx, ny) || !raster.foreground(nx, ny)) continue;
            auto& l = map.labels[static_cast<std::size_t>(ny) * w + nx];
            if (l != 0) continue;
            l = label;
            queue.emplace_back(nx, ny);
          }
        }
      }
    }
  }
  return map;
}

Raster strip_small_components(const Raster& raster, Connectivity conn,
                              double area_fraction) {
  Labeling lab = two_pass_label(raster, conn);
  if (lab.stats.empty()) return raster;
  std::size_t largest = 0;
  for (const auto& s : lab.stats) largest = std::max(largest, s.area);
  const double threshold = area_fraction * static_cast<double>(largest);
  std::vector<bool> drop(lab.stats.size() + 1, false);
  bool any = false;
  for (const auto& s : lab.stats) {
    if (static_cast<double>(s.area) < threshold) {
      drop[s.label] = true;
      any = true;
    }
  }
  if (!any) return raster;
  Raster out = raster;
  for (std::size_t i = 0; i < lab.map.labels.size(); ++i)
    if (drop[lab.map.labels[i]]) out.pixels()[i] = 0;
  return out;
}

bool is_single_component(const Raster& raster, Connectivity conn) {
  return two_pass_label(raster, conn).map.count == 1;
}

}  // namespace lcr
