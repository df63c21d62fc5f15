#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <string>

#include "lcr/alphabet.hpp"
#include "lcr/ccl.hpp"

namespace lcr {

namespace {

// Cell sizes at which stroke connectivity and diacritic separation are
// verified on load.
constexpr int kValidationSizes[] = {16, 17, 23, 32, 47, 64, 100};

struct ParsedGlyph {
  GlyphSpec glyph;
  int line = 0;
};

std::string at_line(int line) { return "line " + std::to_string(line) + ": "; }

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

double parse_real(std::string_view word, int line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
  if (ec != std::errc() || ptr != word.data() + word.size())
    throw ParseError(at_line(line) + "expected a number, got '" +
                     std::string(word) + "'");
  return value;
}

int parse_int(std::string_view word, int line) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
  if (ec != std::errc() || ptr != word.data() + word.size())
    throw ParseError(at_line(line) + "expected an integer, got '" +
                     std::string(word) + "'");
  return value;
}

bool parse_flag(std::string_view word, int line) {
  if (word == "0") return false;
  if (word == "1") return true;
  throw ParseError(at_line(line) + "expected 0 or 1, got '" +
                   std::string(word) + "'");
}

void expect_unit(double v, int line, const char* what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw InvariantError(at_line(line) + what + " lies outside the unit cell");
}

bool has_endpoint(const GlyphSpec& g, Point p) {
  return std::any_of(g.strokes.begin(), g.strokes.end(), [&](const Segment& s) {
    return s.a == p || s.b == p;
  });
}

void validate_glyph_geometry(const ParsedGlyph& pg, double baseline) {
  const GlyphSpec& g = pg.glyph;
  const std::string where = at_line(pg.line) + "glyph " +
                            std::to_string(g.glyph_id) + " ";
  if (g.strokes.empty()) throw InvariantError(where + "has no strokes");
  if (g.joins_forward && !has_endpoint(g, {0.0, baseline}))
    throw InvariantError(where +
                         "joins forward but no stroke ends at the left anchor");
  if (g.joins_backward && !has_endpoint(g, {1.0, baseline}))
    throw InvariantError(
        where + "joins backward but no stroke ends at the right anchor");

  GlyphSpec bare = g;
  bare.diacritics.clear();
  for (int px : kValidationSizes) {
    Raster strokes = render_glyph(bare, StyleSpec::identity(), px, baseline);
    if (two_pass_label(strokes).map.count != 1)
      throw InvariantError(where + "strokes are not one connected component at " +
                           std::to_string(px) + " px");
    if (g.diacritics.empty()) continue;
    Raster full = render_glyph(g, StyleSpec::identity(), px, baseline);
    auto expected = 1 + g.diacritics.size();
    if (two_pass_label(full).map.count != expected)
      throw InvariantError(where + "diacritics touch the strokes or each other at " +
                           std::to_string(px) + " px");
  }
}

}  // namespace

AlphabetSpec load_alphabet(std::string_view document) {
  AlphabetSpec out;
  out.name = "unnamed";
  std::vector<ParsedGlyph> parsed;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= document.size()) {
    std::size_t end = document.find('\n', pos);
    if (end == std::string_view::npos) end = document.size();
    std::string_view line = document.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto words = split_words(line);
    if (words.empty()) continue;

    const std::string_view key = words[0];
    auto arity = [&](std::size_t n) {
      if (words.size() != n)
        throw ParseError(at_line(line_no) + "'" + std::string(key) +
                         "' expects " + std::to_string(n - 1) + " fields");
    };
    if (key == "name") {
      if (words.size() < 2) throw ParseError(at_line(line_no) + "'name' needs a value");
      out.name = std::string(words[1]);
    } else if (key == "connector") {
      arity(2);
      out.baseline = parse_real(words[1], line_no);
      expect_unit(out.baseline, line_no, "connector height");
    } else if (key == "glyph") {
      arity(8);
      if (words[2] != "base" || words[4] != "joinf" || words[6] != "joinb")
        throw ParseError(at_line(line_no) +
                         "expected 'glyph <id> base <id> joinf <0|1> joinb <0|1>'");
      ParsedGlyph pg;
      pg.line = line_no;
      pg.glyph.glyph_id = parse_int(words[1], line_no);
      pg.glyph.base_form_id = parse_int(words[3], line_no);
      pg.glyph.joins_forward = parse_flag(words[5], line_no);
      pg.glyph.joins_backward = parse_flag(words[7], line_no);
      if (pg.glyph.glyph_id < 0 || pg.glyph.base_form_id < 0)
        throw InvariantError(at_line(line_no) + "ids must be non-negative");
      parsed.push_back(std::move(pg));
    } else if (key == "stroke") {
      arity(5);
      if (parsed.empty())
        throw ParseError(at_line(line_no) + "'stroke' before any 'glyph'");
      Segment s{{parse_real(words[1], line_no), parse_real(words[2], line_no)},
                {parse_real(words[3], line_no), parse_real(words[4], line_no)}};
      for (double v : {s.a.x, s.a.y, s.b.x, s.b.y})
        expect_unit(v, line_no, "stroke endpoint");
      parsed.back().glyph.strokes.push_back(s);
    } else if (key == "dot") {
      arity(4);
      if (parsed.empty())
        throw ParseError(at_line(line_no) + "'dot' before any 'glyph'");
      Disk d{{parse_real(words[1], line_no), parse_real(words[2], line_no)},
             parse_real(words[3], line_no)};
      expect_unit(d.center.x, line_no, "dot center");
      expect_unit(d.center.y, line_no, "dot center");
      if (!(d.radius >= 0.0 && d.radius < 0.5))
        throw InvariantError(at_line(line_no) + "dot radius must lie in [0, 0.5)");
      parsed.back().glyph.diacritics.push_back(d);
    } else {
      throw ParseError(at_line(line_no) + "unknown directive '" +
                       std::string(key) + "'");
    }
  }

  if (parsed.empty()) throw InvariantError("empty alphabet");

  std::map<int, int> id_lines;
  for (const auto& pg : parsed) {
    auto [it, fresh] = id_lines.emplace(pg.glyph.glyph_id, pg.line);
    if (!fresh)
      throw InvariantError(at_line(pg.line) + "duplicate glyph_id " +
                           std::to_string(pg.glyph.glyph_id) +
                           " (first defined on line " +
                           std::to_string(it->second) + ")");
  }
  for (int expect = 0; expect < static_cast<int>(parsed.size()); ++expect)
    if (!id_lines.count(expect))
      throw InvariantError("glyph ids must be contiguous from 0; id " +
                           std::to_string(expect) + " is missing");

  std::map<int, const ParsedGlyph*> first_of_base;
  for (const auto& pg : parsed) {
    auto [it, fresh] = first_of_base.emplace(pg.glyph.base_form_id, &pg);
    if (fresh) continue;
    const GlyphSpec& ref = it->second->glyph;
    if (ref.strokes != pg.glyph.strokes ||
        ref.joins_forward != pg.glyph.joins_forward ||
        ref.joins_backward != pg.glyph.joins_backward)
      throw InvariantError(at_line(pg.line) + "glyph " +
                           std::to_string(pg.glyph.glyph_id) +
                           " shares base form " +
                           std::to_string(pg.glyph.base_form_id) + " with glyph " +
                           std::to_string(ref.glyph_id) +
                           " but differs in strokes or joining flags");
  }

  for (const auto& pg : parsed) validate_glyph_geometry(pg, out.baseline);

  std::sort(parsed.begin(), parsed.end(), [](const auto& a, const auto& b) {
    return a.glyph.glyph_id < b.glyph.glyph_id;
  });
  for (auto& pg : parsed) out.glyphs.push_back(std::move(pg.glyph));
  return out;
}

namespace {

std::string real(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::string format_alphabet(const AlphabetSpec& alphabet) {
  std::ostringstream out;
  out << "name " << alphabet.name << "\n";
  out << "connector " << real(alphabet.baseline) << "\n";
  for (const auto& g : alphabet.glyphs) {
    out << "\nglyph " << g.glyph_id << " base " << g.base_form_id << " joinf "
        << g.joins_forward << " joinb " << g.joins_backward << "\n";
    for (const auto& s : g.strokes)
      out << "stroke " << real(s.a.x) << ' ' << real(s.a.y) << ' '
          << real(s.b.x) << ' ' << real(s.b.y) << "\n";
    for (const auto& d : g.diacritics)
      out << "dot " << real(d.center.x) << ' ' << real(d.center.y) << ' '
          << real(d.radius) << "\n";
  }
  return out.str();
}

std::vector<GlyphSpec> base_form_dedup(const AlphabetSpec& alphabet) {
  std::map<int, GlyphSpec> reps;
  for (const auto& g : alphabet.glyphs) {
    auto it = reps.find(g.base_form_id);
    if (it == reps.end() || g.glyph_id < it->second.glyph_id) {
      GlyphSpec rep = g;
      rep.diacritics.clear();
      reps[g.base_form_id] = std::move(rep);
    }
  }
  std::vector<GlyphSpec> out;
  out.reserve(reps.size());
  for (auto& [base, g] : reps) out.push_back(std::move(g));
  return out;
}

}  // namespace lcr
