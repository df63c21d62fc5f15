#include <doctest.h>

#include <set>

#include "lcr/alphabet.hpp"
#include "support.hpp"

using namespace lcr;

namespace {

int components(const Raster& r) { return static_cast<int>(flood_fill_label(r).count); }

Raster stripped(const Raster& r) {
  return strip_small_components(r, Connectivity::eight, 0.04);
}

const GlyphSpec& glyph(const AlphabetSpec& a, int id) { return a.glyphs.at(id); }

std::string error_of(std::string_view doc) {
  try {
    load_alphabet(doc);
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("alphabet") {

TEST_CASE("default alphabet shape") {
  const AlphabetSpec a = default_alphabet();
  CHECK(a.glyphs.size() == 38);
  std::set<int> forms;
  for (const auto& g : a.glyphs) forms.insert(g.base_form_id);
  CHECK(forms.size() == 19);
  for (std::size_t i = 0; i < a.glyphs.size(); ++i) CHECK(a.glyphs[i].glyph_id == static_cast<int>(i));
  CHECK(default_styles().size() == 15);
}

TEST_CASE("shipped document file matches the built-in copy") {
  const std::string file = testing::read_file(std::string(LCR_SOURCE_DIR) + "/data/default.alphabet");
  CHECK(file == std::string(default_alphabet_document()));
}

TEST_CASE("format and load round trip") {
  const AlphabetSpec a = default_alphabet();
  const AlphabetSpec b = load_alphabet(format_alphabet(a));
  CHECK(b.name == a.name);
  CHECK(b.baseline == a.baseline);
  CHECK(b.glyphs == a.glyphs);
}

TEST_CASE("validation errors") {
  CHECK(error_of("# nothing here\nconnector 0.5\n").find("empty alphabet") != std::string::npos);
  CHECK_THROWS_AS(load_alphabet("connector 0.5\n"), InvariantError);

  const std::string dup =
      "glyph 0 base 0 joinf 0 joinb 0\nstroke 0.2 0.5 0.8 0.5\n"
      "glyph 1 base 1 joinf 0 joinb 0\nstroke 0.2 0.4 0.8 0.4\n"
      "glyph 2 base 2 joinf 0 joinb 0\nstroke 0.2 0.3 0.8 0.3\n"
      "glyph 3 base 3 joinf 0 joinb 0\nstroke 0.2 0.6 0.8 0.6\n"
      "glyph 3 base 4 joinf 0 joinb 0\nstroke 0.5 0.2 0.5 0.8\n";
  CHECK_THROWS_AS(load_alphabet(dup), InvariantError);
  CHECK(error_of(dup).find("3") != std::string::npos);
  CHECK(error_of(dup).find("duplicate") != std::string::npos);

  const std::string bad_number = "glyph 0 base 0 joinf 0 joinb 0\nstroke 0.2 zero 0.8 0.5\n";
  CHECK_THROWS_AS(load_alphabet(bad_number), ParseError);
  CHECK(error_of(bad_number).find("line 2") != std::string::npos);

  const std::string disconnected =
      "glyph 0 base 0 joinf 0 joinb 0\nstroke 0.1 0.2 0.3 0.2\nstroke 0.7 0.8 0.9 0.8\n";
  CHECK_THROWS_AS(load_alphabet(disconnected), InvariantError);
}

TEST_CASE("render_glyph component counts") {
  const AlphabetSpec a = default_alphabet();
  const StyleSpec id = StyleSpec::identity();
  CHECK(components(render_glyph(glyph(a, 0), id, 100)) == 1);
  CHECK(components(render_glyph(glyph(a, 1), id, 100)) == 2);

  StyleSpec thick = id;
  thick.stroke_width = 3;
  const Raster thin_r = render_glyph(glyph(a, 0), id, 100);
  const Raster thick_r = render_glyph(glyph(a, 0), thick, 100);
  CHECK(thick_r.foreground_count() > thin_r.foreground_count());
  CHECK(components(thick_r) == components(thin_r));
  CHECK(thin_r.width() == 100);
  CHECK(thin_r.height() == 100);

  CHECK_THROWS_AS(render_glyph(glyph(a, 0), id, 15), ArgumentError);
}

TEST_CASE("every glyph under every style: one stroke component plus its dots") {
  const AlphabetSpec a = default_alphabet();
  for (const auto& style : default_styles())
    for (const auto& g : a.glyphs)
      for (int px : {16, 32, 100}) {
        const Raster r = render_glyph(g, style, px);
        CHECK(components(r) == 1 + static_cast<int>(g.diacritics.size()));
      }
}

TEST_CASE("stroke width never shrinks a component") {
  const AlphabetSpec a = default_alphabet();
  for (const auto& g : a.glyphs) {
    std::size_t prev = 0;
    for (int w = 1; w <= 3; ++w) {
      StyleSpec s = StyleSpec::identity();
      s.stroke_width = w;
      const Raster r = render_glyph(g, s, 100);
      const auto lab = two_pass_label(r);
      CHECK(lab.stats.at(0).area >= prev);
      prev = lab.stats.at(0).area;
    }
  }
}

TEST_CASE("compose_ligature") {
  const AlphabetSpec a = default_alphabet();
  const StyleSpec style = default_styles()[1];
  const GlyphSpec one[] = {glyph(a, 4)};
  CHECK(compose_ligature(one, style, 64) == render_glyph(glyph(a, 4), style, 64));

  // Base form 0 joins both ways; glyph 10 (base 5) does not join forward.
  const GlyphSpec joined[] = {glyph(a, 0), glyph(a, 2)};
  CHECK(is_single_component(stripped(compose_ligature(joined, style, 100))));
  const GlyphSpec broken[] = {glyph(a, 10), glyph(a, 2)};
  CHECK(components(stripped(compose_ligature(broken, style, 100))) == 2);
  const GlyphSpec dotted[] = {glyph(a, 1), glyph(a, 3)};
  CHECK(components(compose_ligature(dotted, style, 100)) == 3);
  CHECK(is_single_component(stripped(compose_ligature(dotted, style, 100))));

  CHECK_THROWS_AS(compose_ligature(std::span<const GlyphSpec>{}, style, 100), ArgumentError);
  const GlyphSpec four[] = {glyph(a, 0), glyph(a, 2), glyph(a, 4), glyph(a, 6)};
  CHECK_THROWS_AS(compose_ligature(four, style, 100), ArgumentError);
  CHECK_THROWS_AS(compose_ligature(joined, style, 19), ArgumentError);
}

TEST_CASE("rendering is deterministic") {
  const AlphabetSpec a = default_alphabet();
  for (const auto& style : default_styles()) {
    const GlyphSpec seq[] = {glyph(a, 1), glyph(a, 7), glyph(a, 20)};
    CHECK(compose_ligature(seq, style, 48) == compose_ligature(seq, style, 48));
  }
}

TEST_CASE("join soundness over all pairs at 100 px") {
  const AlphabetSpec a = default_alphabet();
  const auto forms = base_form_dedup(a);
  auto styles = default_styles();
  styles.resize(3);
  for (const auto& style : styles)
    for (const auto& g0 : forms)
      for (const auto& g1 : forms) {
        if (g0.base_form_id == g1.base_form_id) continue;
        const GlyphSpec pair[] = {g0, g1};
        const bool joins = g0.joins_forward && g1.joins_backward;
        const int n = components(stripped(compose_ligature(pair, style, 100)));
        if (joins)
          CHECK(n == 1);
        else
          CHECK(n >= 2);
      }
}

TEST_CASE("base_form_dedup") {
  const AlphabetSpec a = default_alphabet();
  const auto forms = base_form_dedup(a);
  CHECK(forms.size() == 19);
  for (std::size_t i = 0; i < forms.size(); ++i) {
    CHECK(forms[i].base_form_id == static_cast<int>(i));
    CHECK(forms[i].diacritics.empty());
  }

  AlphabetSpec again = a;
  again.glyphs = forms;
  CHECK(base_form_dedup(again) == forms);

  AlphabetSpec unique;
  unique.glyphs = {glyph(a, 0), glyph(a, 2), glyph(a, 4)};
  CHECK(base_form_dedup(unique).size() == 3);

  AlphabetSpec three;
  three.glyphs = {glyph(a, 0), glyph(a, 1), glyph(a, 2)};
  CHECK(base_form_dedup(three).size() == 2);
}

}
