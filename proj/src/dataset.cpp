#include "lcr/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lcr/hash.hpp"
#include "lcr/permute.hpp"
#include "lcr/pgm.hpp"

namespace lcr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "lcr-corpus";
constexpr int kFormatVersion = 1;
constexpr std::string_view kImageDir = "images";

struct Candidate {
  std::vector<GlyphSpec> glyphs;
  std::vector<int> key;
};

// Runs fn(i) for every i < count; workers pull indices from a shared counter.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
        next = count;
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string connectivity_name(Connectivity c) {
  return c == Connectivity::four ? "four" : "eight";
}

Connectivity parse_connectivity(const std::string& s) {
  if (s == "four") return Connectivity::four;
  if (s == "eight") return Connectivity::eight;
  throw DataError("unknown connectivity '" + s + "'");
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  throw DataError("unknown split '" + s + "'");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string_view split_name(Split split) {
  return split == Split::train ? "train" : "val";
}

std::vector<std::vector<int>> CorpusManifest::class_keys(int degree) const {
  auto it = class_counts.find(degree);
  std::vector<std::vector<int>> keys(it == class_counts.end() ? 0 : it->second);
  for (const auto& s : samples)
    if (s.degree == degree && s.class_id < static_cast<int>(keys.size()))
      keys[s.class_id] = s.class_key;
  return keys;
}

std::vector<std::size_t> CorpusManifest::indices_of_degree(int degree) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].degree == degree) out.push_back(i);
  return out;
}

std::string sample_filename(int degree, int class_id, int style_id) {
  return std::to_string(degree) + "_" + std::to_string(class_id) + "_" +
         std::to_string(style_id) + ".pgm";
}

Corpus generate_corpus(const AlphabetSpec& alphabet,
                       const std::vector<StyleSpec>& styles, int max_degree,
                       int image_px, const CcSettings& cc, int threads) {
  if (max_degree < 1 || max_degree > kMaxDegree)
    throw ArgumentError("max degree must lie in [1, " + std::to_string(kMaxDegree) +
                        "], got " + std::to_string(max_degree));
  if (styles.empty()) throw ArgumentError("at least one style is required");
  if (!(cc.area_fraction >= 0.0 && cc.area_fraction < 1.0))
    throw ArgumentError("area fraction must lie in [0, 1)");
  for (const auto& s : styles) validate_style(s);

  const std::vector<GlyphSpec> forms = base_form_dedup(alphabet);
  Corpus corpus;
  corpus.manifest.alphabet = alphabet.name;
  corpus.manifest.style_count = static_cast<int>(styles.size());
  corpus.manifest.image_px = image_px;
  corpus.manifest.cc = cc;

  for (int degree = 1; degree <= max_degree; ++degree) {
    std::vector<Candidate> candidates;
    KPermutations<GlyphSpec> perms(forms, degree);
    for (auto it = perms.begin(); it != perms.end(); ++it) {
      Candidate c{*it, {}};
      for (const auto& g : c.glyphs) c.key.push_back(g.base_form_id);
      candidates.push_back(std::move(c));
    }
    // Forms are sorted by base form, so enumeration order is key order.
    std::vector<std::vector<Raster>> kept(candidates.size());
    std::vector<int> passes(candidates.size(), 0);
    parallel_for(candidates.size(), threads, [&](std::size_t i) {
      std::vector<Raster> out;
      for (const auto& style : styles) {
        Raster r = strip_small_components(
            compose_ligature(candidates[i].glyphs, style, image_px,
                             alphabet.baseline, max_degree),
            cc.connectivity, cc.area_fraction);
        if (is_single_component(r, cc.connectivity)) {
          ++passes[i];
          out.push_back(std::move(r));
        }
      }
      if (passes[i] == static_cast<int>(styles.size())) kept[i] = std::move(out);
    });

    int class_id = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (passes[i] != static_cast<int>(styles.size())) {
        if (passes[i] > 0) ++corpus.partial_survivors[degree];
        continue;
      }
      for (std::size_t s = 0; s < styles.size(); ++s) {
        SampleRecord rec;
        rec.degree = degree;
        rec.class_id = class_id;
        rec.class_key = candidates[i].key;
        rec.style_id = styles[s].style_id;
        rec.path = std::string(kImageDir) + "/" +
                   sample_filename(degree, class_id, rec.style_id);
        corpus.manifest.samples.push_back(std::move(rec));
        corpus.rasters.push_back(std::move(kept[i][s]));
      }
      ++class_id;
    }
    if (class_id == 0)
      throw DataError("no sequence of degree " + std::to_string(degree) +
                      " survives the single-component filter");
    corpus.manifest.class_counts[degree] = class_id;
  }
  return corpus;
}

CorpusManifest split_corpus(const CorpusManifest& manifest, double val_fraction,
                            std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw ArgumentError("validation fraction must lie in (0, 1)");
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < manifest.samples.size(); ++i)
    groups[{manifest.samples[i].degree, manifest.samples[i].class_id}].push_back(i);

  CorpusManifest out = manifest;
  for (auto& [cls, members] : groups) {
    const int n = static_cast<int>(members.size());
    if (n < 2)
      throw DataError("class " + std::to_string(cls.second) + " of degree " +
                      std::to_string(cls.first) + " has " + std::to_string(n) +
                      " sample(s); a stratified split needs at least 2");
    const int n_val =
        std::clamp(static_cast<int>(std::lround(n * val_fraction)), 1, n - 1);
    const std::uint64_t key = mix_keys({seed, static_cast<std::uint64_t>(cls.first),
                                        static_cast<std::uint64_t>(cls.second)});
    for (int i = n - 1; i > 0; --i) {
      const auto j = static_cast<int>(
          splitmix64(key ^ static_cast<std::uint64_t>(i)) % static_cast<std::uint64_t>(i + 1));
      std::swap(members[i], members[j]);
    }
    for (int i = 0; i < n; ++i)
      out.samples[members[i]].split = i < n_val ? Split::val : Split::train;
  }
  return out;
}

void validate_augment(const AugmentParams& p) {
  if (!(p.rotation_max >= 0.0 && p.rotation_max <= 15.0))
    throw ArgumentError("rotation_max must lie in [0, 15] degrees");
  const auto [lo, hi] = p.zoom_range;
  if (!(lo > 0.5 && hi < 1.5 && lo <= hi))
    throw ArgumentError("zoom range must satisfy 0.5 < min <= max < 1.5");
}

Raster augment(const Raster& raster, const AugmentParams& p, std::uint64_t draw_index) {
  validate_augment(p);
  if (p.neutral()) return raster;
  const std::uint64_t key = mix_keys({p.seed, draw_index});
  const bool flip = p.flip_horizontal && unit_double(splitmix64(key ^ 1)) < 0.5;
  const double angle = (2.0 * unit_double(splitmix64(key ^ 2)) - 1.0) * p.rotation_max *
                       std::numbers::pi / 180.0;
  const double zoom = p.zoom_range.first + unit_double(splitmix64(key ^ 3)) *
                                               (p.zoom_range.second - p.zoom_range.first);
  const int w = raster.width(), h = raster.height();
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  const double c = std::cos(angle), s = std::sin(angle);
  Raster out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      // Undo zoom, then rotation, then flip.
      const double zx = (x - cx) / zoom, zy = (y - cy) / zoom;
      const double rx = c * zx + s * zy, ry = -s * zx + c * zy;
      int sx = static_cast<int>(std::floor(rx + cx + 0.5));
      const int sy = static_cast<int>(std::floor(ry + cy + 0.5));
      if (flip) sx = w - 1 - sx;
      if (raster.contains(sx, sy)) out.at(x, y) = raster.at(sx, sy);
    }
  return out;
}

WeightMode parse_weight_mode(std::string_view text) {
  if (text == "preset") return WeightMode::preset;
  if (text == "balanced") return WeightMode::balanced;
  if (text == "uniform") return WeightMode::uniform;
  throw ArgumentError("unknown class weight mode '" + std::string(text) + "'");
}

ClassWeights compute_class_weights(const CorpusManifest& manifest, WeightMode mode,
                                   WeightTarget target) {
  if (manifest.samples.empty()) throw DataError("cannot weight an empty manifest");
  std::map<int, std::size_t> counts;
  for (const auto& s : manifest.samples) {
    if (target.degree == 0)
      ++counts[s.degree];
    else if (s.degree == target.degree)
      ++counts[s.class_id];
  }
  if (counts.empty())
    throw DataError("manifest has no samples of degree " + std::to_string(target.degree));

  ClassWeights out;
  switch (mode) {
    case WeightMode::uniform:
      for (const auto& [cls, n] : counts) out.weights[cls] = 1.0;
      break;
    case WeightMode::balanced: {
      std::size_t total = 0;
      for (const auto& [cls, n] : counts) total += n;
      for (const auto& [cls, n] : counts)
        out.weights[cls] = static_cast<double>(total) /
                           (static_cast<double>(counts.size()) * static_cast<double>(n));
      break;
    }
    case WeightMode::preset: {
      // Only level 0 carries preset weights; level-1 models train unweighted.
      static const std::map<int, double> kNone;
      const auto& preset = target.degree == 0 ? level0_preset_weights() : kNone;
      for (const auto& [cls, n] : counts) {
        auto it = preset.find(cls);
        if (it != preset.end()) {
          out.weights[cls] = it->second;
        } else {
          out.weights[cls] = 1.0;
          if (target.degree == 0)
            out.warnings.push_back("class " + std::to_string(cls) +
                                   " has no preset weight; using 1");
        }
      }
      break;
    }
  }
  return out;
}

std::string manifest_sample_line(const SampleRecord& r) {
  json j = json::object();
  j["path"] = r.path;
  j["degree"] = r.degree;
  j["class_id"] = r.class_id;
  j["class_key"] = r.class_key;
  j["style_id"] = r.style_id;
  j["split"] = std::string(split_name(r.split));
  return j.dump();
}

std::uint64_t manifest_checksum(const std::vector<SampleRecord>& samples) {
  std::uint64_t h = fnv1a64("");
  for (const auto& s : samples) {
    h = fnv1a64(manifest_sample_line(s), h);
    h = fnv1a64("\n", h);
  }
  return h;
}

void save_corpus(const Corpus& corpus, const fs::path& dir) {
  const auto& m = corpus.manifest;
  if (m.samples.size() != corpus.rasters.size())
    throw ArgumentError("corpus has " + std::to_string(m.samples.size()) +
                        " records but " + std::to_string(corpus.rasters.size()) +
                        " rasters");
  std::error_code ec;
  fs::create_directories(dir / kImageDir, ec);
  if (ec) throw DataError("cannot create " + (dir / kImageDir).string() + ": " + ec.message());

  json header = json::object();
  header["format"] = kFormat;
  header["version"] = kFormatVersion;
  header["alphabet"] = m.alphabet;
  header["style_count"] = m.style_count;
  header["image_px"] = m.image_px;
  json counts = json::object();
  for (const auto& [d, n] : m.class_counts) counts[std::to_string(d)] = n;
  header["class_counts"] = counts;
  header["sample_count"] = m.samples.size();
  header["connectivity"] = connectivity_name(m.cc.connectivity);
  header["area_fraction"] = m.cc.area_fraction;
  header["checksum"] = hex64(manifest_checksum(m.samples));

  for (std::size_t i = 0; i < m.samples.size(); ++i)
    write_pgm(dir / m.samples[i].path, corpus.rasters[i]);

  const fs::path manifest_path = dir / kManifestName;
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + manifest_path.string());
  out << header.dump() << '\n';
  for (const auto& s : m.samples) out << manifest_sample_line(s) << '\n';
  if (!out) throw DataError("write failed for " + manifest_path.string());
}

Corpus load_corpus(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestName;
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw DataError("cannot open " + manifest_path.string());

  const std::string where = manifest_path.string();
  auto fail = [&](std::size_t line, const std::string& what) -> DataError {
    return DataError(where + ":" + std::to_string(line) + ": " + what);
  };

  Corpus corpus;
  auto& m = corpus.manifest;
  std::string line;
  std::size_t line_no = 0;
  std::string expected_checksum;
  std::size_t expected_count = 0;
  try {
    if (!std::getline(in, line)) throw fail(1, "missing header line");
    ++line_no;
    const json header = json::parse(line);
    if (header.at("format").get<std::string>() != kFormat)
      throw fail(1, "not a corpus manifest");
    if (header.at("version").get<int>() != kFormatVersion)
      throw fail(1, "unsupported manifest version " + header.at("version").dump());
    m.alphabet = header.at("alphabet").get<std::string>();
    m.style_count = header.at("style_count").get<int>();
    m.image_px = header.at("image_px").get<int>();
    for (const auto& [d, n] : header.at("class_counts").items())
      m.class_counts[std::stoi(d)] = n.get<int>();
    m.cc.connectivity = parse_connectivity(header.at("connectivity").get<std::string>());
    m.cc.area_fraction = header.at("area_fraction").get<double>();
    expected_checksum = header.at("checksum").get<std::string>();
    expected_count = header.at("sample_count").get<std::size_t>();

    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line);
      SampleRecord r;
      r.path = j.at("path").get<std::string>();
      r.degree = j.at("degree").get<int>();
      r.class_id = j.at("class_id").get<int>();
      r.class_key = j.at("class_key").get<std::vector<int>>();
      r.style_id = j.at("style_id").get<int>();
      r.split = parse_split(j.at("split").get<std::string>());
      if (r.degree < 1 || r.degree > kMaxDegree ||
          static_cast<int>(r.class_key.size()) != r.degree || r.class_id < 0)
        throw fail(line_no, "inconsistent degree/class fields");
      const fs::path rel(r.path);
      if (rel.is_absolute() ||
          std::any_of(rel.begin(), rel.end(), [](const fs::path& p) { return p == ".."; }))
        throw fail(line_no, "sample path escapes the corpus directory");
      m.samples.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw fail(line_no, std::string("malformed manifest line: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw fail(line_no, "malformed class count key");
  }

  if (m.samples.size() != expected_count)
    throw DataError(where + ": header declares " + std::to_string(expected_count) +
                    " samples, found " + std::to_string(m.samples.size()));
  const std::string actual = hex64(manifest_checksum(m.samples));
  if (actual != expected_checksum)
    throw DataError(where + ": checksum mismatch (header " + expected_checksum +
                    ", computed " + actual + ")");

  corpus.rasters.reserve(m.samples.size());
  for (const auto& s : m.samples) {
    Raster r = read_pgm(dir / s.path);
    if (r.width() != m.image_px || r.height() != m.image_px)
      throw DataError((dir / s.path).string() + ": expected " +
                      std::to_string(m.image_px) + "x" + std::to_string(m.image_px) +
                      " image");
    corpus.rasters.push_back(std::move(r));
  }
  return corpus;
}

}  // namespace lcr
