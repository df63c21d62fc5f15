#include "lcr/alphabet.hpp"

namespace lcr {

namespace {

// Base forms 0-4 join on both sides, 5-17 only accept a connection from
// the previous glyph, 18 joins nothing. Every base form has a plain glyph
// (even id) and a one-dot glyph (odd id). Joining glyphs end a stroke on
// the baseline anchors (1, 0.5) and/or (0, 0.5).
constexpr std::string_view kDocument = R"(# Default synthetic joinable-glyph alphabet.
name synthetic-naskh-19
connector 0.5

glyph 0 base 0 joinf 1 joinb 1
stroke 1 0.5 0.5 0.5
stroke 0.5 0.5 0 0.5
stroke 0.5 0.5 0.5 0.2
glyph 1 base 0 joinf 1 joinb 1
stroke 1 0.5 0.5 0.5
stroke 0.5 0.5 0 0.5
stroke 0.5 0.5 0.5 0.2
dot 0.5 0.85 0.008

glyph 2 base 1 joinf 1 joinb 1
stroke 1 0.5 0.7 0.5
stroke 0.7 0.5 0.3 0.5
stroke 0.3 0.5 0 0.5
stroke 0.7 0.5 0.7 0.25
stroke 0.3 0.5 0.3 0.25
glyph 3 base 1 joinf 1 joinb 1
stroke 1 0.5 0.7 0.5
stroke 0.7 0.5 0.3 0.5
stroke 0.3 0.5 0 0.5
stroke 0.7 0.5 0.7 0.25
stroke 0.3 0.5 0.3 0.25
dot 0.5 0.88 0.008

glyph 4 base 2 joinf 1 joinb 1
stroke 1 0.5 0.65 0.5
stroke 0.65 0.5 0.35 0.5
stroke 0.35 0.5 0 0.5
stroke 0.65 0.5 0.65 0.85
stroke 0.65 0.85 0.35 0.85
stroke 0.35 0.85 0.35 0.5
glyph 5 base 2 joinf 1 joinb 1
stroke 1 0.5 0.65 0.5
stroke 0.65 0.5 0.35 0.5
stroke 0.35 0.5 0 0.5
stroke 0.65 0.5 0.65 0.85
stroke 0.65 0.85 0.35 0.85
stroke 0.35 0.85 0.35 0.5
dot 0.5 0.1 0.008

glyph 6 base 3 joinf 1 joinb 1
stroke 1 0.5 0.75 0.5
stroke 0.75 0.5 0 0.5
stroke 0.75 0.5 0.75 0.05
glyph 7 base 3 joinf 1 joinb 1
stroke 1 0.5 0.75 0.5
stroke 0.75 0.5 0 0.5
stroke 0.75 0.5 0.75 0.05
dot 0.3 0.1 0.008

glyph 8 base 4 joinf 1 joinb 1
stroke 1 0.5 0.7 0.5
stroke 0.7 0.5 0.3 0.5
stroke 0.3 0.5 0 0.5
stroke 0.7 0.5 0.5 0.15
stroke 0.5 0.15 0.3 0.5
glyph 9 base 4 joinf 1 joinb 1
stroke 1 0.5 0.7 0.5
stroke 0.7 0.5 0.3 0.5
stroke 0.3 0.5 0 0.5
stroke 0.7 0.5 0.5 0.15
stroke 0.5 0.15 0.3 0.5
dot 0.5 0.88 0.008

glyph 10 base 5 joinf 0 joinb 1
stroke 1 0.5 0.5 0.5
stroke 0.5 0.5 0.5 0.05
glyph 11 base 5 joinf 0 joinb 1
stroke 1 0.5 0.5 0.5
stroke 0.5 0.5 0.5 0.05
dot 0.12 0.88 0.008

glyph 12 base 6 joinf 0 joinb 1
stroke 1 0.5 0.3 0.5
stroke 0.3 0.5 0.5 0.25
glyph 13 base 6 joinf 0 joinb 1
stroke 1 0.5 0.3 0.5
stroke 0.3 0.5 0.5 0.25
dot 0.85 0.1 0.008

glyph 14 base 7 joinf 0 joinb 1
stroke 1 0.5 0.6 0.5
stroke 0.6 0.5 0.2 0.9
glyph 15 base 7 joinf 0 joinb 1
stroke 1 0.5 0.6 0.5
stroke 0.6 0.5 0.2 0.9
dot 0.75 0.1 0.008

glyph 16 base 8 joinf 0 joinb 1
stroke 1 0.5 0.5 0.5
stroke 0.5 0.5 0.3 0.3
stroke 0.3 0.3 0.5 0.1
stroke 0.5 0.1 0.7 0.3
stroke 0.7 0.3 0.5 0.5
glyph 17 base 8 joinf 0 joinb 1
stroke 1 0.5 0.5 0.5
stroke 0.5 0.5 0.3 0.3
stroke 0.3 0.3 0.5 0.1
stroke 0.5 0.1 0.7 0.3
stroke 0.7 0.3 0.5 0.5
dot 0.15 0.88 0.008

glyph 18 base 9 joinf 0 joinb 1
stroke 1 0.5 0.7 0.5
stroke 0.7 0.5 0.4 0.8
stroke 0.4 0.8 0.05 0.8
glyph 19 base 9 joinf 0 joinb 1
stroke 1 0.5 0.7 0.5
stroke 0.7 0.5 0.4 0.8
stroke 0.4 0.8 0.05 0.8
dot 0.25 0.15 0.008

glyph 20 base 10 joinf 0 joinb 1
stroke 1 0.5 0.2 0.5
stroke 0.2 0.5 0.2 0.85
glyph 21 base 10 joinf 0 joinb 1
stroke 1 0.5 0.2 0.5
stroke 0.2 0.5 0.2 0.85
dot 0.6 0.1 0.008

glyph 22 base 11 joinf 0 joinb 1
stroke 1 0.5 0.4 0.5
stroke 0.4 0.5 0.4 0.9
stroke 0.4 0.9 0.8 0.9
glyph 23 base 11 joinf 0 joinb 1
stroke 1 0.5 0.4 0.5
stroke 0.4 0.5 0.4 0.9
stroke 0.4 0.9 0.8 0.9
dot 0.12 0.12 0.008

glyph 24 base 12 joinf 0 joinb 1
stroke 1 0.5 0.3 0.5
stroke 0.3 0.5 0.3 0.1
stroke 0.3 0.1 0.7 0.1
glyph 25 base 12 joinf 0 joinb 1
stroke 1 0.5 0.3 0.5
stroke 0.3 0.5 0.3 0.1
stroke 0.3 0.1 0.7 0.1
dot 0.6 0.88 0.008

glyph 26 base 13 joinf 0 joinb 1
stroke 1 0.5 0.5 0.5
stroke 0.5 0.5 0.2 0.2
stroke 0.2 0.2 0.8 0.2
glyph 27 base 13 joinf 0 joinb 1
stroke 1 0.5 0.5 0.5
stroke 0.5 0.5 0.2 0.2
stroke 0.2 0.2 0.8 0.2
dot 0.5 0.88 0.008

glyph 28 base 14 joinf 0 joinb 1
stroke 1 0.5 0.6 0.5
stroke 0.6 0.5 0.1 0.5
stroke 0.1 0.5 0.1 0.2
stroke 0.6 0.5 0.6 0.85
glyph 29 base 14 joinf 0 joinb 1
stroke 1 0.5 0.6 0.5
stroke 0.6 0.5 0.1 0.5
stroke 0.1 0.5 0.1 0.2
stroke 0.6 0.5 0.6 0.85
dot 0.5 0.1 0.008

glyph 30 base 15 joinf 0 joinb 1
stroke 1 0.5 0.8 0.5
stroke 0.8 0.5 0.8 0.9
stroke 0.8 0.9 0.2 0.9
stroke 0.2 0.9 0.2 0.5
glyph 31 base 15 joinf 0 joinb 1
stroke 1 0.5 0.8 0.5
stroke 0.8 0.5 0.8 0.9
stroke 0.8 0.9 0.2 0.9
stroke 0.2 0.9 0.2 0.5
dot 0.5 0.12 0.008

glyph 32 base 16 joinf 0 joinb 1
stroke 1 0.5 0.5 0.5
stroke 0.5 0.5 0.5 0.9
stroke 0.5 0.9 0.1 0.6
glyph 33 base 16 joinf 0 joinb 1
stroke 1 0.5 0.5 0.5
stroke 0.5 0.5 0.5 0.9
stroke 0.5 0.9 0.1 0.6
dot 0.12 0.12 0.008

glyph 34 base 17 joinf 0 joinb 1
stroke 1 0.5 0.6 0.5
stroke 0.6 0.5 0.2 0.5
stroke 0.6 0.5 0.4 0.15
stroke 0.4 0.15 0.8 0.15
glyph 35 base 17 joinf 0 joinb 1
stroke 1 0.5 0.6 0.5
stroke 0.6 0.5 0.2 0.5
stroke 0.6 0.5 0.4 0.15
stroke 0.4 0.15 0.8 0.15
dot 0.3 0.88 0.008

glyph 36 base 18 joinf 0 joinb 0
stroke 0.75 0.25 0.35 0.25
stroke 0.35 0.25 0.65 0.55
stroke 0.65 0.55 0.35 0.75
glyph 37 base 18 joinf 0 joinb 0
stroke 0.75 0.25 0.35 0.25
stroke 0.35 0.25 0.65 0.55
stroke 0.65 0.55 0.35 0.75
dot 0.9 0.92 0.008
)";

}  // namespace

std::string_view default_alphabet_document() { return kDocument; }

AlphabetSpec default_alphabet() { return load_alphabet(kDocument); }

}  // namespace lcr
