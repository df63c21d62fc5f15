#include "lcr/hierarchy.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "lcr/hash.hpp"
#include "lcr/nn/model_io.hpp"

namespace lcr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kDegrees[] = {1, 2, 3};

std::string degree_name(int degree) { return "degree" + std::to_string(degree); }

std::vector<double> to_double(const nn::Tensor<double>& probs, std::size_t row) {
  const std::size_t d = probs.size() / probs.dim(0);
  return {probs.data() + row * d, probs.data() + (row + 1) * d};
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::string fmt(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

void HierarchicalModel::validate() const {
  if (image_px < 1) throw InvariantError("hierarchy has no image size");
  if (level1.empty()) throw InvariantError("hierarchy has no level-1 models");
  const int outputs = level0.num_classes();
  if (outputs != static_cast<int>(level1.size()))
    throw InvariantError("level-0 model has " + std::to_string(outputs) +
                         " outputs but " + std::to_string(level1.size()) +
                         " level-1 models are present");
  int expected = 1;
  for (const auto& [degree, model] : level1) {
    if (degree != expected++)
      throw InvariantError("level-1 degrees must be 1.." + std::to_string(level1.size()));
    auto keys = class_keys.find(degree);
    if (keys == class_keys.end() ||
        static_cast<int>(keys->second.size()) != model.num_classes())
      throw InvariantError("class keys of degree " + std::to_string(degree) +
                           " do not match its model's outputs");
  }
  auto check_input = [&](const nn::TrainedModel& m, const std::string& name) {
    if (m.spec.input_h != image_px || m.spec.input_w != image_px || m.spec.input_c != 1)
      throw InvariantError("model " + name + " does not take " + std::to_string(image_px) +
                           "x" + std::to_string(image_px) + " single-channel input");
  };
  check_input(level0, "level0");
  for (const auto& [degree, model] : level1) check_input(model, degree_name(degree));
}

ModelJob make_job(const Corpus& corpus, const std::string& name,
                  const HierarchyTrainOptions& options) {
  const auto& manifest = corpus.manifest;
  const nn::TrainingPreset preset =
      nn::training_preset(options.alternate_lr ? name + "-lr1e-4" : name);

  ModelJob job;
  job.name = name;
  int classes = 0;
  int degree = 0;
  if (name == "level0") {
    classes = static_cast<int>(manifest.class_counts.size());
  } else {
    degree = name.back() - '0';
    auto it = manifest.class_counts.find(degree);
    if (it == manifest.class_counts.end() || manifest.indices_of_degree(degree).empty())
      throw DataError("corpus has no samples of degree " + std::to_string(degree));
    classes = it->second;
  }
  job.spec = nn::preset_model(preset.architecture, manifest.image_px, classes);

  for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
    const auto& s = manifest.samples[i];
    if (degree != 0 && s.degree != degree) continue;
    auto& set = s.split == Split::val ? job.data.val : job.data.train;
    set.images.push_back(&corpus.rasters[i]);
    set.labels.push_back(degree == 0 ? s.degree - 1 : s.class_id);
  }

  const ClassWeights weights =
      compute_class_weights(manifest, preset.weights, WeightTarget{degree});
  job.config.class_weights.resize(classes, 1.0);
  for (int c = 0; c < classes; ++c)
    job.config.class_weights[c] = weights.weight(degree == 0 ? c + 1 : c);

  job.config.epochs = preset.epochs;
  job.config.learning_rate = preset.learning_rate;
  job.config.optimizer = preset.optimizer;
  job.config.batch_size = preset.batch_size;
  job.config.augment = options.augment;
  job.config.threads = options.threads;
  std::uint64_t model_index = degree;
  job.config.seed = mix_keys({options.seed, model_index});
  auto apply = [&](const ModelOverrides& o) {
    if (o.epochs) job.config.epochs = *o.epochs;
    if (o.learning_rate) job.config.learning_rate = *o.learning_rate;
  };
  apply(options.all);
  if (auto it = options.per_model.find(name); it != options.per_model.end()) apply(it->second);
  return job;
}

nn::TrainedModel train_model(const ModelJob& job, const HierarchyTrainOptions& options) {
  try {
    return nn::train(job.spec, job.data, job.config, options.precision,
                     [&](const nn::EpochRecord& r) {
                       if (options.on_epoch) options.on_epoch(job.name, r);
                     });
  } catch (const DivergenceError& e) {
    throw DivergenceError("model " + job.name + ": " + e.what(), e.epoch());
  }
}

HierarchicalModel train_hierarchy(const Corpus& corpus, const HierarchyTrainOptions& options) {
  for (int d : kDegrees)
    if (corpus.manifest.indices_of_degree(d).empty())
      throw DataError("corpus has no samples of degree " + std::to_string(d) +
                      "; the hierarchy needs degrees 1, 2 and 3");
  HierarchicalModel model;
  model.image_px = corpus.manifest.image_px;
  model.level0 = train_model(make_job(corpus, "level0", options), options);
  for (int d : kDegrees) {
    model.level1[d] = train_model(make_job(corpus, degree_name(d), options), options);
    model.class_keys[d] = corpus.manifest.class_keys(d);
  }
  model.validate();
  return model;
}

Raster resample(const Raster& raster, int width, int height) {
  Raster out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out.at(x, y) = raster.at(static_cast<int>(static_cast<long long>(x) * raster.width() / width),
                               static_cast<int>(static_cast<long long>(y) * raster.height() / height));
  return out;
}

HierarchicalPredictor::HierarchicalPredictor(const HierarchicalModel& model)
    : model_(model), level0_(nn::instantiate<double>(model.level0)) {
  model_.validate();
  for (const auto& [d, m] : model_.level1) level1_.emplace(d, nn::instantiate<double>(m));
}

Prediction HierarchicalPredictor::predict(const Raster& raster) const {
  const Raster* one[] = {&raster};
  return predict_batch(one).front();
}

std::vector<Prediction> HierarchicalPredictor::predict_batch(
    std::span<const Raster* const> rasters) const {
  std::vector<Prediction> out(rasters.size());
  if (rasters.empty()) return out;
  const int px = model_.image_px;
  std::vector<Raster> resized;
  resized.reserve(rasters.size());
  std::vector<const Raster*> inputs;
  for (std::size_t i = 0; i < rasters.size(); ++i) {
    const Raster* r = rasters[i];
    if (r->width() != px || r->height() != px) {
      out[i].warning = "input " + std::to_string(r->width()) + "x" +
                       std::to_string(r->height()) + " resampled to " + std::to_string(px) +
                       "x" + std::to_string(px);
      resized.push_back(resample(*r, px, px));
      r = &resized.back();
    }
    inputs.push_back(r);
  }

  const nn::Tensor<double> p0 = level0_.predict(nn::rasters_to_tensor<double>(inputs));
  std::map<int, std::vector<std::size_t>> routed;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    out[i].level0_probs = to_double(p0, i);
    out[i].degree = static_cast<int>(argmax(out[i].level0_probs)) + 1;
    routed[out[i].degree].push_back(i);
  }
  for (const auto& [degree, members] : routed) {
    std::vector<const Raster*> group;
    for (std::size_t i : members) group.push_back(inputs[i]);
    const auto probs = level1_probs(degree, group);
    for (std::size_t k = 0; k < members.size(); ++k) {
      Prediction& p = out[members[k]];
      p.level1_probs = probs[k];
      p.class_id = static_cast<int>(argmax(p.level1_probs));
      p.class_key = model_.class_keys.at(degree).at(p.class_id);
    }
  }
  return out;
}

std::vector<std::vector<double>> HierarchicalPredictor::level1_probs(
    int degree, std::span<const Raster* const> rasters) const {
  auto it = level1_.find(degree);
  if (it == level1_.end())
    throw ArgumentError("no level-1 model for degree " + std::to_string(degree));
  std::vector<std::vector<double>> out;
  constexpr std::size_t kBatch = 64;
  for (std::size_t start = 0; start < rasters.size(); start += kBatch) {
    auto chunk = rasters.subspan(start, std::min(kBatch, rasters.size() - start));
    const auto probs = it->second.predict(nn::rasters_to_tensor<double>(chunk));
    for (std::size_t i = 0; i < chunk.size(); ++i) out.push_back(to_double(probs, i));
  }
  return out;
}

MetricsReport metrics_from_confusion(std::string dataset, std::vector<int> labels,
                                     std::vector<std::vector<long long>> confusion) {
  const std::size_t k = labels.size();
  if (confusion.size() != k)
    throw ArgumentError("confusion matrix rows do not match the label count");
  for (const auto& row : confusion)
    if (row.size() != k) throw ArgumentError("confusion matrix is not square");

  MetricsReport m;
  m.dataset = std::move(dataset);
  m.labels = std::move(labels);
  long long total = 0, trace = 0;
  std::vector<long long> rows(k, 0), cols(k, 0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const long long v = confusion[i][j];
      if (v < 0) throw ArgumentError("negative confusion count");
      total += v;
      rows[i] += v;
      cols[j] += v;
      if (i == j) trace += v;
    }
  m.confusion = std::move(confusion);
  m.samples = static_cast<std::size_t>(total);
  if (total == 0) return m;
  m.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (rows[c] == 0 && cols[c] == 0) continue;
    ++present;
    const double tp = static_cast<double>(m.confusion[c][c]);
    const double p = cols[c] ? tp / static_cast<double>(cols[c]) : 0.0;
    const double r = rows[c] ? tp / static_cast<double>(rows[c]) : 0.0;
    p_sum += p;
    r_sum += r;
    f_sum += p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  m.precision = p_sum / present;
  m.recall = r_sum / present;
  m.f1 = f_sum / present;
  return m;
}

MetricsReport compute_metrics(std::string dataset, std::span<const int> truth,
                              std::span<const int> predicted, std::vector<int> labels) {
  if (truth.size() != predicted.size())
    throw ArgumentError("truth and prediction counts differ");
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = i;
  std::vector<std::vector<long long>> confusion(labels.size(),
                                                std::vector<long long>(labels.size(), 0));
  auto at = [&](int label) {
    auto it = index.find(label);
    if (it == index.end()) throw ArgumentError("label " + std::to_string(label) + " is not listed");
    return it->second;
  };
  for (std::size_t i = 0; i < truth.size(); ++i) ++confusion[at(truth[i])][at(predicted[i])];
  return metrics_from_confusion(std::move(dataset), std::move(labels), std::move(confusion));
}

EvaluationReport evaluate(const HierarchicalPredictor& predictor,
                          std::span<const GroundTruth> samples) {
  if (samples.empty()) throw DataError("cannot evaluate an empty sample set");
  const auto& model = predictor.model();
  std::vector<const Raster*> rasters;
  for (const auto& s : samples) {
    if (!model.level1.count(s.degree))
      throw DataError("sample of degree " + std::to_string(s.degree) +
                      " has no level-1 model");
    rasters.push_back(s.raster);
  }
  const auto predictions = predictor.predict_batch(rasters);

  EvaluationReport report;
  report.samples = samples.size();
  std::vector<int> degree_labels, truth, pred;
  for (const auto& [d, m] : model.level1) degree_labels.push_back(d);
  std::size_t joint = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    truth.push_back(samples[i].degree);
    pred.push_back(predictions[i].degree);
    joint += predictions[i].degree == samples[i].degree &&
             predictions[i].class_id == samples[i].class_id;
  }
  report.level0 = compute_metrics("level0", truth, pred, degree_labels);
  report.joint_accuracy = static_cast<double>(joint) / static_cast<double>(samples.size());

  for (const auto& [d, m] : model.level1) {
    std::vector<const Raster*> group;
    std::vector<int> t;
    for (const auto& s : samples)
      if (s.degree == d) {
        group.push_back(s.raster);
        t.push_back(s.class_id);
      }
    if (group.empty()) continue;
    std::vector<int> p;
    for (const auto& probs : predictor.level1_probs(d, group))
      p.push_back(static_cast<int>(argmax(probs)));
    std::vector<int> labels(m.num_classes());
    std::iota(labels.begin(), labels.end(), 0);
    report.per_degree[d] = compute_metrics(degree_name(d), t, p, std::move(labels));
  }
  return report;
}

std::string report_csv(const EvaluationReport& report) {
  std::string out = "dataset,accuracy,precision,recall,f1\n";
  auto row = [&](const MetricsReport& m) {
    out += m.dataset + "," + fmt(m.accuracy) + "," + fmt(m.precision) + "," +
           fmt(m.recall) + "," + fmt(m.f1) + "\n";
  };
  row(report.level0);
  for (const auto& [d, m] : report.per_degree) row(m);
  // Joint accuracy has no per-class counterpart.
  out += "joint," + fmt(report.joint_accuracy) + ",,,\n";
  return out;
}

std::string confusion_csv(const MetricsReport& m) {
  std::string out = "true\\predicted";
  for (int l : m.labels) out += "," + std::to_string(l);
  out += "\n";
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    out += std::to_string(m.labels[i]);
    for (long long v : m.confusion[i]) out += "," + std::to_string(v);
    out += "\n";
  }
  return out;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace

void write_report(const EvaluationReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "report.csv", report_csv(report));
  write_text(dir / "confusion_level0.csv", confusion_csv(report.level0));
  for (const auto& [d, m] : report.per_degree)
    write_text(dir / ("confusion_" + m.dataset + ".csv"), confusion_csv(m));
}

void save_hierarchy(const HierarchicalModel& model, const fs::path& dir) {
  model.validate();
  fs::create_directories(dir);
  json doc = json::object();
  doc["format"] = "lcr-hierarchy";
  doc["version"] = 1;
  doc["image_px"] = model.image_px;
  nn::save_model(model.level0, dir / "level0.ucnn");
  nn::write_history_csv(model.level0.history, dir / "level0_history.csv");
  doc["level0"] = {{"model", "level0.ucnn"}, {"best_epoch", model.level0.best_epoch}};
  json degrees = json::array();
  for (const auto& [d, m] : model.level1) {
    const std::string name = degree_name(d);
    nn::save_model(m, dir / (name + ".ucnn"));
    nn::write_history_csv(m.history, dir / (name + "_history.csv"));
    degrees.push_back({{"degree", d},
                       {"model", name + ".ucnn"},
                       {"best_epoch", m.best_epoch},
                       {"class_keys", model.class_keys.at(d)}});
  }
  doc["degrees"] = degrees;
  write_text(dir / "hierarchy.json", doc.dump(2) + "\n");
}

HierarchicalModel load_hierarchy(const fs::path& dir) {
  const fs::path index = dir / "hierarchy.json";
  std::ifstream in(index, std::ios::binary);
  if (!in) throw DataError("cannot open " + index.string());
  HierarchicalModel model;
  try {
    const json doc = json::parse(in);
    if (doc.at("format").get<std::string>() != "lcr-hierarchy")
      throw DataError(index.string() + ": not a hierarchy index");
    model.image_px = doc.at("image_px").get<int>();
    auto model_path = [&](const json& entry) {
      const fs::path rel(entry.at("model").get<std::string>());
      if (rel.has_parent_path() || rel.is_absolute())
        throw DataError(index.string() + ": model paths must be plain file names");
      return dir / rel;
    };
    model.level0 = nn::load_model(model_path(doc.at("level0")));
    model.level0.best_epoch = doc.at("level0").value("best_epoch", 0);
    for (const auto& entry : doc.at("degrees")) {
      const int d = entry.at("degree").get<int>();
      model.level1[d] = nn::load_model(model_path(entry));
      model.level1[d].best_epoch = entry.value("best_epoch", 0);
      model.class_keys[d] = entry.at("class_keys").get<std::vector<std::vector<int>>>();
    }
  } catch (const json::exception& e) {
    throw DataError(index.string() + ": malformed hierarchy index: " + e.what());
  }
  try {
    model.validate();
  } catch (const InvariantError& e) {
    throw DataError(index.string() + ": " + e.what());
  }
  return model;
}

}  // namespace lcr
