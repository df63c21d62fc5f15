#include <algorithm>
#include <cmath>
#include <string>

#include "lcr/alphabet.hpp"
#include "lcr/hash.hpp"

namespace lcr {

namespace {

// Fraction of a slot taken by the glyph cell; the rest is the gap that a
// connector spans.
constexpr double kCellFraction = 0.6;
// One extra pixel of stroke width per this many pixels of slot.
constexpr int kSlotPxPerStrokePx = 12;

struct PixelPoint {
  int x = 0;
  int y = 0;
};

class Canvas {
 public:
  Canvas(int size, const StyleSpec& style, int slots)
      : raster_(size, size),
        size_(size),
        style_(style),
        slot_(static_cast<double>(size) / slots),
        cell_(kCellFraction * slot_) {
    int cap = std::max(1, static_cast<int>(slot_) / kSlotPxPerStrokePx);
    width_ = std::min(style.stroke_width, cap);
  }

  // Maps unit-cell coordinates of the glyph in `slot` (0 = rightmost)
  // through scale, shear and jitter to a pixel.
  PixelPoint map(int slot, Point p) const {
    const double cell_left =
        size_ - (slot + 1) * slot_ + 0.5 * (1.0 - kCellFraction) * slot_;
    const double cell_top = 0.5 * (size_ - cell_);
    const double u = 0.5 + style_.scale * (p.x - 0.5);
    const double v = 0.5 + style_.scale * (p.y - 0.5);
    double x = cell_left + u * cell_;
    double y = cell_top + v * cell_;
    x += style_.shear * (0.5 * size_ - y);
    if (style_.jitter > 0.0) {
      // Keyed by position so that coincident vertices move together.
      auto qx = static_cast<std::uint64_t>(std::llround(x * 1024.0));
      auto qy = static_cast<std::uint64_t>(std::llround(y * 1024.0));
      std::uint64_t h = mix_keys({style_.seed, qx, qy});
      x += (2.0 * unit_double(h) - 1.0) * style_.jitter;
      y += (2.0 * unit_double(splitmix64(h)) - 1.0) * style_.jitter;
    }
    return {clamp(static_cast<int>(std::floor(x))),
            clamp(static_cast<int>(std::floor(y)))};
  }

  int radius_px(double radius) const {
    return static_cast<int>(std::lround(radius * cell_ * style_.scale));
  }

  void stroke(PixelPoint a, PixelPoint b) {
    const int lo = -(width_ - 1) / 2;
    const int hi = width_ / 2;
    int dx = std::abs(b.x - a.x), sx = a.x < b.x ? 1 : -1;
    int dy = -std::abs(b.y - a.y), sy = a.y < b.y ? 1 : -1;
    int err = dx + dy;
    int x = a.x, y = a.y;
    for (;;) {
      for (int oy = lo; oy <= hi; ++oy)
        for (int ox = lo; ox <= hi; ++ox) plot(x + ox, y + oy);
      if (x == b.x && y == b.y) break;
      int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }

  // Midpoint circle; each octant point contributes two horizontal spans.
  void disk(PixelPoint c, int r) {
    int x = r, y = 0, d = 1 - r;
    while (x >= y) {
      span(c.x - x, c.x + x, c.y + y);
      span(c.x - x, c.x + x, c.y - y);
      span(c.x - y, c.x + y, c.y + x);
      span(c.x - y, c.x + y, c.y - x);
      ++y;
      if (d < 0) {
        d += 2 * y + 1;
      } else {
        --x;
        d += 2 * (y - x) + 1;
      }
    }
  }

  Raster release() { return std::move(raster_); }

 private:
  int clamp(int v) const { return std::clamp(v, 0, size_ - 1); }

  void plot(int x, int y) {
    if (raster_.contains(x, y)) raster_.at(x, y) = kInk;
  }

  void span(int x0, int x1, int y) {
    for (int x = x0; x <= x1; ++x) plot(x, y);
  }

  Raster raster_;
  int size_;
  StyleSpec style_;
  double slot_;
  double cell_;
  int width_ = 1;
};

}  // namespace

void validate_style(const StyleSpec& style) {
  if (style.stroke_width < 1)
    throw ArgumentError("style " + std::to_string(style.style_id) +
                        ": stroke_width must be >= 1");
  if (!(style.scale > 0.5 && style.scale <= 1.0))
    throw ArgumentError("style " + std::to_string(style.style_id) +
                        ": scale must lie in (0.5, 1]");
  if (!(style.jitter >= 0.0) || !std::isfinite(style.shear))
    throw ArgumentError("style " + std::to_string(style.style_id) +
                        ": jitter must be >= 0 and shear finite");
}

Raster compose_ligature(std::span<const GlyphSpec> sequence,
                        const StyleSpec& style, int canvas_px, double baseline,
                        int max_degree) {
  const int n = static_cast<int>(sequence.size());
  if (n == 0) throw ArgumentError("cannot compose an empty glyph sequence");
  if (n > max_degree)
    throw ArgumentError("sequence of " + std::to_string(n) +
                        " glyphs exceeds max degree " +
                        std::to_string(max_degree));
  const int min_canvas = std::max(kMinCellPx, kMinSlotPx * n);
  if (canvas_px < min_canvas)
    throw ArgumentError("canvas of " + std::to_string(canvas_px) +
                        " px is below the minimum " +
                        std::to_string(min_canvas) + " px for " +
                        std::to_string(n) + " glyph(s)");
  validate_style(style);

  Canvas canvas(canvas_px, style, n);
  for (int i = 0; i < n; ++i) {
    for (const Segment& s : sequence[i].strokes)
      canvas.stroke(canvas.map(i, s.a), canvas.map(i, s.b));
    for (const Disk& d : sequence[i].diacritics)
      canvas.disk(canvas.map(i, d.center), canvas.radius_px(d.radius));
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (sequence[i].joins_forward && sequence[i + 1].joins_backward)
      canvas.stroke(canvas.map(i, {0.0, baseline}),
                    canvas.map(i + 1, {1.0, baseline}));
  }
  return canvas.release();
}

Raster render_glyph(const GlyphSpec& glyph, const StyleSpec& style,
                    int cell_px, double baseline) {
  if (cell_px < kMinCellPx)
    throw ArgumentError("cell size " + std::to_string(cell_px) +
                        " px is below the minimum " +
                        std::to_string(kMinCellPx) + " px");
  return compose_ligature(std::span<const GlyphSpec>(&glyph, 1), style,
                          cell_px, baseline);
}

std::vector<StyleSpec> default_styles() {
  struct Row {
    int width;
    double shear;
    double scale;
  };
  // First three rows span every axis so short prefixes stay diverse.
  static constexpr Row kRows[15] = {
      {1, 0.0, 1.0},  {2, 0.2, 0.9},  {3, -0.2, 0.8}, {1, 0.2, 0.8},
      {2, -0.2, 1.0}, {3, 0.0, 0.9},  {1, -0.2, 0.9}, {2, 0.0, 0.8},
      {3, 0.2, 1.0},  {1, 0.0, 0.9},  {2, 0.2, 1.0},  {3, -0.2, 0.9},
      {1, 0.2, 1.0},  {2, -0.2, 0.8}, {3, 0.0, 0.8},
  };
  std::vector<StyleSpec> styles;
  for (int i = 0; i < 15; ++i) {
    StyleSpec s;
    s.style_id = i;
    s.stroke_width = kRows[i].width;
    s.shear = kRows[i].shear;
    s.scale = kRows[i].scale;
    s.jitter = i % 2 == 1 ? 0.5 : 0.0;
    s.seed = 0x5EED0000ULL + static_cast<std::uint64_t>(i);
    styles.push_back(s);
  }
  return styles;
}

}  // namespace lcr
