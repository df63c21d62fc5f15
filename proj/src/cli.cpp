#include "lcr/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lcr/ccl.hpp"
#include "lcr/dataset.hpp"
#include "lcr/hash.hpp"
#include "lcr/hierarchy.hpp"
#include "lcr/nn/gradcheck.hpp"
#include "lcr/nn/model_io.hpp"
#include "lcr/nn/presets.hpp"
#include "lcr/pgm.hpp"

namespace lcr::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  bool deterministic = false;
  int threads = 1;
  std::string out;
  std::string precision = "float64";

  int worker_threads() const { return deterministic ? 1 : threads; }
};

struct GenDataset {
  std::string alphabet;
  int styles = 15;
  int size = kDefaultImagePx;
  int max_degree = kMaxDegree;
  double val_fraction = kDefaultValFraction;
  std::string connectivity = "eight";
  double area_fraction = 0.04;
};

struct InspectCc {
  std::string image;
  std::string connectivity = "eight";
  double area_fraction = 0.04;
};

struct Train {
  std::string corpus;
  int level = -1;
  int degree = 0;
  bool hierarchy = false;
  std::string preset;
  int epochs = 0;
  double lr = 0.0;
  int size = 0;
  bool augment = false;
  bool alternate_lr = false;
};

struct Eval {
  std::string model;
  std::string corpus;
  std::string split = "val";
};

struct Predict {
  std::string model;
  std::string image;
};

struct GradCheck {
  std::string preset = "all";
  int size = 8;
  int samples = 2;
  std::size_t subsample = 2048;
  double tolerance = 1e-4;
};

Connectivity parse_connectivity(const std::string& s) {
  if (s == "eight" || s == "8") return Connectivity::eight;
  if (s == "four" || s == "4") return Connectivity::four;
  throw UsageError("--connectivity must be four or eight");
}

fs::path output_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv(kOutEnv); env && *env) return env;
  return ".";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

std::string join_key(const std::vector<int>& key) {
  std::string s;
  for (std::size_t i = 0; i < key.size(); ++i) s += (i ? "-" : "") + std::to_string(key[i]);
  return s;
}

std::string probs_string(const std::vector<double>& p) {
  std::ostringstream os;
  os << std::setprecision(6);
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? " " : "") << p[i];
  return os.str();
}

void print_epoch(std::ostream& out, const std::string& model, const nn::EpochRecord& r) {
  out << model << " epoch " << r.epoch << ": loss " << r.train_loss << " acc "
      << r.train_acc << " val_loss " << r.val_loss << " val_acc " << r.val_acc << "\n";
  out.flush();
}

Corpus resized_corpus(Corpus corpus, int size, std::ostream& err) {
  if (size == 0 || size == corpus.manifest.image_px) return corpus;
  err << "warning: resampling " << corpus.manifest.image_px << " px corpus images to "
      << size << " px\n";
  for (auto& r : corpus.rasters) r = resample(r, size, size);
  corpus.manifest.image_px = size;
  return corpus;
}

int cmd_gen_alphabet(const Common& c, std::ostream& out) {
  const fs::path dir = output_dir(c);
  ensure_dir(dir);
  const fs::path path = dir / "default.alphabet";
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f << default_alphabet_document();
  out << "wrote " << path.string() << "\n";
  return kOk;
}

int cmd_gen_dataset(const Common& c, const GenDataset& g, std::ostream& out) {
  if (g.styles < 1 || g.styles > static_cast<int>(default_styles().size()))
    throw UsageError("--styles must lie in [1, " + std::to_string(default_styles().size()) + "]");
  if (g.max_degree < 1 || g.max_degree > kMaxDegree)
    throw UsageError("--max-degree must lie in [1, 3]");
  if (!(g.val_fraction > 0.0 && g.val_fraction < 1.0))
    throw UsageError("--val-fraction must lie in (0, 1)");
  if (!(g.area_fraction >= 0.0 && g.area_fraction < 1.0))
    throw UsageError("--area-fraction must lie in [0, 1)");
  const int min_px = std::max(kMinCellPx, kMinSlotPx * g.max_degree);
  if (g.size < min_px)
    throw UsageError("--size must be at least " + std::to_string(min_px) + " for degree " +
                     std::to_string(g.max_degree));
  const CcSettings cc{parse_connectivity(g.connectivity), g.area_fraction};

  AlphabetSpec alphabet;
  if (g.alphabet.empty()) {
    alphabet = default_alphabet();
  } else {
    std::ifstream f(g.alphabet, std::ios::binary);
    if (!f) throw DataError("cannot open alphabet " + g.alphabet);
    std::stringstream ss;
    ss << f.rdbuf();
    try {
      alphabet = load_alphabet(ss.str());
    } catch (const std::exception& e) {
      throw DataError(g.alphabet + ": " + e.what());
    }
  }
  auto styles = default_styles();
  styles.resize(g.styles);

  Corpus corpus = generate_corpus(alphabet, styles, g.max_degree, g.size, cc, c.worker_threads());
  corpus.manifest = split_corpus(corpus.manifest, g.val_fraction, c.seed);
  const fs::path dir = output_dir(c);
  save_corpus(corpus, dir);
  for (const auto& [d, n] : corpus.manifest.class_counts) {
    out << "degree " << d << ": " << n << " classes";
    if (auto it = corpus.partial_survivors.find(d); it != corpus.partial_survivors.end())
      out << " (" << it->second << " keys dropped: single component under some styles only)";
    out << "\n";
  }
  out << corpus.manifest.samples.size() << " samples written to " << dir.string() << "\n";
  return kOk;
}

int cmd_inspect_cc(const InspectCc& o, std::ostream& out) {
  const Connectivity conn = parse_connectivity(o.connectivity);
  if (!(o.area_fraction >= 0.0 && o.area_fraction < 1.0))
    throw UsageError("--area-fraction must lie in [0, 1)");
  const Raster raster = read_pgm(o.image);
  const Labeling lab = two_pass_label(raster, conn);
  out << "image " << o.image << " " << raster.width() << "x" << raster.height() << "\n";
  out << "components " << lab.map.count << "\n";
  out << "label,area,min_x,min_y,max_x,max_y,centroid_x,centroid_y\n";
  for (const auto& s : lab.stats)
    out << s.label << "," << s.area << "," << s.min_x << "," << s.min_y << "," << s.max_x << ","
        << s.max_y << "," << s.centroid_x << "," << s.centroid_y << "\n";
  const Raster stripped = strip_small_components(raster, conn, o.area_fraction);
  out << "components after strip " << two_pass_label(stripped, conn).map.count << "\n";
  out << "single component " << (is_single_component(stripped, conn) ? "yes" : "no") << "\n";
  return kOk;
}

int cmd_train(const Common& c, const Train& t, std::ostream& out, std::ostream& err) {
  if (!t.hierarchy && t.level < 0) throw UsageError("train needs --level or --hierarchy");
  if (t.hierarchy && t.level >= 0) throw UsageError("--hierarchy and --level are exclusive");
  if (t.level > 1) throw UsageError("--level must be 0 or 1");
  if (t.level == 1 && (t.degree < 1 || t.degree > kMaxDegree))
    throw UsageError("--level 1 requires --degree 1, 2 or 3");
  if (t.level == 0 && t.degree != 0) throw UsageError("--degree only applies to --level 1");
  if (t.corpus.empty()) throw UsageError("train needs --corpus");
  if (t.epochs < 0) throw UsageError("--epochs must be >= 1");
  if (t.lr < 0.0) throw UsageError("--lr must be positive");
  if (t.size != 0 && t.size < 8) throw UsageError("--size must be at least 8");

  HierarchyTrainOptions opts;
  opts.seed = c.seed;
  opts.precision = nn::parse_precision(c.precision);
  opts.threads = c.worker_threads();
  opts.alternate_lr = t.alternate_lr;
  if (t.epochs > 0) opts.all.epochs = t.epochs;
  if (t.lr > 0.0) opts.all.learning_rate = t.lr;
  if (t.augment) opts.augment = AugmentParams{10.0, {0.9, 1.1}, true, c.seed};
  opts.on_epoch = [&](const std::string& m, const nn::EpochRecord& r) { print_epoch(out, m, r); };

  std::string name;
  if (!t.hierarchy) {
    name = t.level == 0 ? "level0" : "degree" + std::to_string(t.degree);
    if (!t.preset.empty()) {
      const auto p = nn::training_preset(t.preset);  // validates the name
      if (p.architecture != name)
        throw UsageError("preset " + t.preset + " does not train " + name);
      opts.alternate_lr = p.name != p.architecture;
    }
  } else if (!t.preset.empty()) {
    throw UsageError("--preset applies to a single model; use --lr-alt with --hierarchy");
  }

  const Corpus corpus = resized_corpus(load_corpus(t.corpus), t.size, err);
  const fs::path dir = output_dir(c);
  ensure_dir(dir);
  if (t.hierarchy) {
    const HierarchicalModel model = train_hierarchy(corpus, opts);
    save_hierarchy(model, dir);
    out << "hierarchy written to " << dir.string() << "\n";
    return kOk;
  }
  const ModelJob job = make_job(corpus, name, opts);
  const nn::TrainedModel model = train_model(job, opts);
  nn::save_model(model, dir / (name + ".ucnn"));
  nn::write_history_csv(model.history, dir / (name + "_history.csv"));
  out << name << ": best epoch " << model.best_epoch << ", model written to "
      << (dir / (name + ".ucnn")).string() << "\n";
  return kOk;
}

int cmd_eval(const Common& c, const Eval& e, std::ostream& out) {
  if (e.split != "val" && e.split != "train" && e.split != "all")
    throw UsageError("--split must be val, train or all");
  const HierarchicalModel model = load_hierarchy(e.model);
  const Corpus corpus = load_corpus(e.corpus);
  if (corpus.manifest.image_px != model.image_px)
    throw DataError("corpus images are " + std::to_string(corpus.manifest.image_px) +
                    " px but the models take " + std::to_string(model.image_px) + " px");
  std::vector<GroundTruth> samples;
  for (std::size_t i = 0; i < corpus.rasters.size(); ++i) {
    const auto& s = corpus.manifest.samples[i];
    if (e.split != "all" && split_name(s.split) != e.split) continue;
    samples.push_back({&corpus.rasters[i], s.degree, s.class_id});
  }
  if (samples.empty()) throw DataError("no samples in split " + e.split);
  const HierarchicalPredictor predictor(model);
  const EvaluationReport report = evaluate(predictor, samples);
  const fs::path dir = output_dir(c);
  write_report(report, dir);
  out << report_csv(report);
  return kOk;
}

int cmd_predict(const Predict& p, std::ostream& out, std::ostream& err) {
  const HierarchicalPredictor predictor(load_hierarchy(p.model));
  const Raster raster = read_pgm(p.image);
  const Prediction pred = predictor.predict(raster);
  if (!pred.warning.empty()) err << "warning: " << pred.warning << "\n";
  out << "degree " << pred.degree << "\n";
  out << "class_id " << pred.class_id << "\n";
  out << "class_key " << join_key(pred.class_key) << "\n";
  out << "level0_probs " << probs_string(pred.level0_probs) << "\n";
  out << "level1_probs " << probs_string(pred.level1_probs) << "\n";
  return kOk;
}

int cmd_gradcheck(const Common& c, const GradCheck& g, std::ostream& out) {
  if (g.size < 8) throw UsageError("--size must be at least 8");
  if (g.samples < 1) throw UsageError("--samples must be >= 1");
  std::vector<std::string> archs;
  if (g.preset == "all") {
    archs = {"level0", "degree1", "degree2", "degree3"};
  } else {
    archs.push_back(nn::training_preset(g.preset).architecture);
  }
  if (nn::parse_precision(c.precision) != nn::Precision::f64)
    throw PrecisionError("gradient checking requires --precision float64");
  double worst = 0.0;
  for (const auto& arch : archs) {
    const int classes = nn::default_class_count(arch);
    const nn::Network<double> net(nn::preset_model(arch, g.size, classes),
                                  mix_keys({c.seed, 0x6Cu}));
    nn::Tensor<double> x({g.samples, g.size, g.size, 1});
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = unit_double(mix_keys({c.seed, 0x1Au, i}));
    std::vector<int> labels;
    for (int i = 0; i < g.samples; ++i)
      labels.push_back(static_cast<int>(mix_keys({c.seed, 0x1Bu, static_cast<std::uint64_t>(i)}) %
                                        static_cast<std::uint64_t>(classes)));
    nn::GradCheckOptions opt;
    opt.seed = c.seed;
    opt.subsample = g.subsample;
    const auto r = nn::grad_check(net, x, labels, {}, opt);
    out << arch << ": max_rel_error " << r.max_rel_error << " (" << r.checked << " of "
        << r.total_parameters << " parameters, " << r.skipped_kinks << " at kinks)\n";
    worst = std::max(worst, r.max_rel_error);
  }
  out << "max_rel_error " << worst << "\n";
  if (!(worst < g.tolerance)) {
    out << "gradient check failed: tolerance " << g.tolerance << "\n";
    return kData;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic cursive ligature corpus and hierarchical CNN recognizer"};
  app.name(args.empty() ? "lcr" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--seed", common.seed, "Seed for every random choice");
  app.add_flag("--deterministic", common.deterministic, "Single-threaded execution");
  app.add_option("--threads", common.threads, "Worker threads")->check(CLI::Range(1, 256));
  app.add_option("--out", common.out, std::string("Output directory (default $") + kOutEnv + " or .)");
  app.add_option("--precision", common.precision, "float64 or float32")
      ->check(CLI::IsMember({"float64", "float32", "f64", "f32"}));

  auto* gen_alpha = app.add_subcommand("gen-alphabet", "Write the default alphabet document");

  GenDataset gd;
  auto* gen_data = app.add_subcommand("gen-dataset", "Build and persist a corpus");
  gen_data->add_option("--alphabet", gd.alphabet, "Alphabet document (default: built in)");
  gen_data->add_option("--styles", gd.styles, "Number of styles");
  gen_data->add_option("--size", gd.size, "Image side in pixels");
  gen_data->add_option("--max-degree", gd.max_degree, "Longest sequence");
  gen_data->add_option("--val-fraction", gd.val_fraction, "Validation share per class");
  gen_data->add_option("--connectivity", gd.connectivity, "four or eight");
  gen_data->add_option("--area-fraction", gd.area_fraction, "Strip threshold");

  InspectCc ic;
  auto* inspect = app.add_subcommand("inspect-cc", "Print connected components of a PGM");
  inspect->add_option("image", ic.image, "PGM file")->required();
  inspect->add_option("--connectivity", ic.connectivity, "four or eight");
  inspect->add_option("--area-fraction", ic.area_fraction, "Strip threshold");

  Train tr;
  auto* train = app.add_subcommand("train", "Train one model or the whole hierarchy");
  train->add_option("--corpus", tr.corpus, "Corpus directory")->required();
  train->add_option("--level", tr.level, "0 (degree classifier) or 1");
  train->add_option("--degree", tr.degree, "Degree for --level 1");
  train->add_flag("--hierarchy", tr.hierarchy, "Train all four models");
  train->add_option("--preset", tr.preset, "Training preset name");
  train->add_option("--epochs", tr.epochs, "Override the preset epochs");
  train->add_option("--lr", tr.lr, "Override the preset learning rate");
  train->add_option("--size", tr.size, "Resample corpus images to this size");
  train->add_flag("--augment", tr.augment, "On-the-fly flip/rotation/zoom");
  train->add_flag("--lr-alt", tr.alternate_lr, "Use the 1e-4 learning-rate presets");

  Eval ev;
  auto* eval = app.add_subcommand("eval", "Evaluate a hierarchy on a corpus");
  eval->add_option("--model", ev.model, "Hierarchy directory")->required();
  eval->add_option("--corpus", ev.corpus, "Corpus directory")->required();
  eval->add_option("--split", ev.split, "val, train or all");

  Predict pr;
  auto* predict = app.add_subcommand("predict", "Classify one PGM image");
  predict->add_option("--model", pr.model, "Hierarchy directory")->required();
  predict->add_option("image", pr.image, "PGM file")->required();

  GradCheck gc;
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient check of the presets");
  grad->add_option("--preset", gc.preset, "Preset name or all");
  grad->add_option("--size", gc.size, "Input side in pixels");
  grad->add_option("--samples", gc.samples, "Batch size");
  grad->add_option("--subsample", gc.subsample, "Parameters checked on large models");
  grad->add_option("--tolerance", gc.tolerance, "Failure threshold");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("lcr");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  }

  try {
    if (gen_alpha->parsed()) return cmd_gen_alphabet(common, out);
    if (gen_data->parsed()) return cmd_gen_dataset(common, gd, out);
    if (inspect->parsed()) return cmd_inspect_cc(ic, out);
    if (train->parsed()) return cmd_train(common, tr, out, err);
    if (eval->parsed()) return cmd_eval(common, ev, out);
    if (predict->parsed()) return cmd_predict(pr, out, err);
    if (grad->parsed()) return cmd_gradcheck(common, gc, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DivergenceError& e) {
    err << "training diverged: " << e.what() << "\n";
    return kDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace lcr::cli
