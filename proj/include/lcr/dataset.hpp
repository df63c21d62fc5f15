#ifndef LCR_DATASET_HPP_
#define LCR_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lcr/alphabet.hpp"
#include "lcr/ccl.hpp"
#include "lcr/raster.hpp"

namespace lcr {

enum class Split { train, val };

std::string_view split_name(Split split);

// One manifest line. The raster lives alongside, at the same index in
// Corpus::rasters.
struct SampleRecord {
  std::string path;  // relative to the corpus directory
  int degree = 1;
  int class_id = 0;
  std::vector<int> class_key;  // base_form_id per position
  int style_id = 0;
  Split split = Split::train;
  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct CorpusManifest {
  std::string alphabet;
  int style_count = 0;
  int image_px = 0;
  std::map<int, int> class_counts;  // degree -> classes
  CcSettings cc;
  std::vector<SampleRecord> samples;

  // class_key per class_id for one degree, in id order.
  std::vector<std::vector<int>> class_keys(int degree) const;
  std::vector<std::size_t> indices_of_degree(int degree) const;
};

struct Corpus {
  CorpusManifest manifest;
  std::vector<Raster> rasters;
  // Keys that stayed single-component under only some styles; excluded.
  std::map<int, int> partial_survivors;
};

inline constexpr int kDefaultImagePx = 100;
inline constexpr double kDefaultValFraction = 0.2;

std::string sample_filename(int degree, int class_id, int style_id);

// Samples are ordered by (degree, class_id, style_id). A key becomes a
// class only if its stripped composition is one component under every
// style, so each class has exactly one sample per style. `threads` only
// affects speed.
Corpus generate_corpus(const AlphabetSpec& alphabet,
                       const std::vector<StyleSpec>& styles, int max_degree,
                       int image_px, const CcSettings& cc = {}, int threads = 1);

// Stratified per (degree, class_id): round(n * fraction) samples, clamped
// to [1, n - 1], go to val.
CorpusManifest split_corpus(const CorpusManifest& manifest, double val_fraction,
                            std::uint64_t seed);

struct AugmentParams {
  double rotation_max = 0.0;  // degrees
  std::pair<double, double> zoom_range{1.0, 1.0};
  bool flip_horizontal = false;
  std::uint64_t seed = 0;

  bool neutral() const {
    return rotation_max == 0.0 && zoom_range.first == 1.0 &&
           zoom_range.second == 1.0 && !flip_horizontal;
  }
};

void validate_augment(const AugmentParams& params);

// Flip (p = 1/2), rotate, zoom about the image centre, nearest neighbour.
// Pure in (params, draw_index).
Raster augment(const Raster& raster, const AugmentParams& params,
               std::uint64_t draw_index);

enum class WeightMode { preset, balanced, uniform };

WeightMode parse_weight_mode(std::string_view text);

struct ClassWeights {
  std::map<int, double> weights;
  std::vector<std::string> warnings;

  double weight(int class_id) const {
    auto it = weights.find(class_id);
    return it == weights.end() ? 1.0 : it->second;
  }
};

// Level-0 labels are degrees (1..3); level-1 labels are class ids.
struct WeightTarget {
  int degree = 0;  // 0 selects level 0
};

inline const std::map<int, double>& level0_preset_weights() {
  static const std::map<int, double> kWeights{{1, 350.0}, {2, 30.0}, {3, 10.0}};
  return kWeights;
}

ClassWeights compute_class_weights(const CorpusManifest& manifest, WeightMode mode,
                                   WeightTarget target = {});

inline constexpr std::string_view kManifestName = "manifest.jsonl";

// Writes images/<degree>_<class>_<style>.pgm and manifest.jsonl.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

// The sample lines exactly as persisted, and their checksum.
std::string manifest_sample_line(const SampleRecord& record);
std::uint64_t manifest_checksum(const std::vector<SampleRecord>& samples);

}  // namespace lcr

#endif  // LCR_DATASET_HPP_
