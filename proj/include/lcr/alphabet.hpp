#ifndef LCR_ALPHABET_HPP_
#define LCR_ALPHABET_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcr/raster.hpp"

namespace lcr {

// Unit-cell coordinates: x grows leftward-to-rightward, y grows downward,
// both in [0, 1] over the glyph's cell.
struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Segment {
  Point a, b;
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Disk {
  Point center;
  double radius = 0.0;  // fraction of the cell side
  friend bool operator==(const Disk&, const Disk&) = default;
};

struct GlyphSpec {
  int glyph_id = 0;
  int base_form_id = 0;
  std::vector<Segment> strokes;
  std::vector<Disk> diacritics;
  bool joins_forward = false;   // connects to the next glyph (on its left)
  bool joins_backward = false;  // accepts a connection from the previous one
  friend bool operator==(const GlyphSpec&, const GlyphSpec&) = default;
};

struct AlphabetSpec {
  std::string name;
  double baseline = 0.5;  // connector height y_b
  std::vector<GlyphSpec> glyphs;

  // The connector runs from the left anchor (0, y_b) of a glyph to the right
  // anchor (1, y_b) of the glyph that follows it.
  Point forward_anchor() const { return {0.0, baseline}; }
  Point backward_anchor() const { return {1.0, baseline}; }
};

struct StyleSpec {
  int style_id = 0;
  int stroke_width = 1;  // pixels
  double shear = 0.0;    // horizontal slant per unit of height
  double scale = 1.0;    // glyph scale inside its cell, in (0.5, 1]
  double jitter = 0.0;   // max per-vertex offset, pixels
  std::uint64_t seed = 0;

  static StyleSpec identity() { return {}; }
};

inline constexpr int kMinCellPx = 16;
// Smallest per-glyph slot a composition may use (degree 3 fits in 32 px).
inline constexpr int kMinSlotPx = 10;
inline constexpr int kMaxDegree = 3;

// Parses and validates an alphabet document. Throws ParseError for
// malformed lines and InvariantError for semantic violations; messages
// carry the offending line number.
AlphabetSpec load_alphabet(std::string_view document);
std::string format_alphabet(const AlphabetSpec& alphabet);

// The shipped 38-glyph / 19-base-form alphabet, as a document.
std::string_view default_alphabet_document();
AlphabetSpec default_alphabet();

// Fifteen font-like variations; callers may take a prefix.
std::vector<StyleSpec> default_styles();
void validate_style(const StyleSpec& style);

Raster render_glyph(const GlyphSpec& glyph, const StyleSpec& style,
                    int cell_px, double baseline = 0.5);

// Glyph 0 of the sequence lands in the rightmost slot. A connector is
// drawn between neighbours i and i+1 iff i joins forward and i+1 joins
// backward.
Raster compose_ligature(std::span<const GlyphSpec> sequence,
                        const StyleSpec& style, int canvas_px,
                        double baseline = 0.5, int max_degree = kMaxDegree);

// One representative per base form with its diacritics removed, ordered by
// base_form_id; glyph ids of the representatives are kept.
std::vector<GlyphSpec> base_form_dedup(const AlphabetSpec& alphabet);

}  // namespace lcr

#endif  // LCR_ALPHABET_HPP_
