#ifndef LCR_HIERARCHY_HPP_
#define LCR_HIERARCHY_HPP_

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcr/dataset.hpp"
#include "lcr/nn/presets.hpp"
#include "lcr/nn/train.hpp"

namespace lcr {

// Level 0 predicts degree - 1; each level-1 model predicts a class id of
// its degree.
struct HierarchicalModel {
  nn::TrainedModel level0;
  std::map<int, nn::TrainedModel> level1;
  std::map<int, std::vector<std::vector<int>>> class_keys;  // degree -> id -> key
  int image_px = 0;

  void validate() const;
};

struct ModelOverrides {
  std::optional<int> epochs;
  std::optional<double> learning_rate;
};

struct HierarchyTrainOptions {
  std::uint64_t seed = 0;
  nn::Precision precision = nn::Precision::f64;
  int threads = 1;
  std::optional<AugmentParams> augment;
  bool alternate_lr = false;  // use the "-lr1e-4" presets
  ModelOverrides all;         // applied to every model
  std::map<std::string, ModelOverrides> per_model;  // "level0", "degree1", ...
  std::function<void(const std::string& model, const nn::EpochRecord&)> on_epoch;
};

// Model names are "level0" and "degree<d>".
struct ModelJob {
  std::string name;
  nn::ModelSpec spec;
  nn::TrainData data;
  nn::TrainConfig config;
};

// Builds the job for one model from a split corpus, following the preset
// of the same name and the option overrides.
ModelJob make_job(const Corpus& corpus, const std::string& name,
                  const HierarchyTrainOptions& options);

nn::TrainedModel train_model(const ModelJob& job, const HierarchyTrainOptions& options);

// Trains level 0 and one model per degree 1..3. Divergence errors are
// re-raised with the model name.
HierarchicalModel train_hierarchy(const Corpus& corpus, const HierarchyTrainOptions& options);

struct Prediction {
  int degree = 0;
  int class_id = 0;
  std::vector<int> class_key;
  std::vector<double> level0_probs;
  std::vector<double> level1_probs;
  std::string warning;  // set when the input had to be resampled
};

// Nearest-neighbour resize.
Raster resample(const Raster& raster, int width, int height);

class HierarchicalPredictor {
 public:
  explicit HierarchicalPredictor(const HierarchicalModel& model);

  Prediction predict(const Raster& raster) const;
  std::vector<Prediction> predict_batch(std::span<const Raster* const> rasters) const;
  // Level-1 probabilities of `degree`'s model regardless of routing.
  std::vector<std::vector<double>> level1_probs(int degree,
                                                std::span<const Raster* const> rasters) const;

  const HierarchicalModel& model() const { return model_; }

 private:
  HierarchicalModel model_;
  nn::Network<double> level0_;
  std::map<int, nn::Network<double>> level1_;
};

struct MetricsReport {
  std::string dataset;
  std::vector<int> labels;  // row/column label of the confusion matrix
  std::vector<std::vector<long long>> confusion;  // [true][predicted]
  std::size_t samples = 0;
  double accuracy = 0.0;
  double precision = 0.0;  // macro over classes seen in truth or predictions
  double recall = 0.0;
  double f1 = 0.0;
};

MetricsReport metrics_from_confusion(std::string dataset, std::vector<int> labels,
                                     std::vector<std::vector<long long>> confusion);
MetricsReport compute_metrics(std::string dataset, std::span<const int> truth,
                              std::span<const int> predicted, std::vector<int> labels);

struct EvaluationReport {
  MetricsReport level0;
  std::map<int, MetricsReport> per_degree;  // conditioned on the true degree
  double joint_accuracy = 0.0;              // degree and class both right
  std::size_t samples = 0;
};

struct GroundTruth {
  const Raster* raster = nullptr;
  int degree = 0;
  int class_id = 0;
};

EvaluationReport evaluate(const HierarchicalPredictor& predictor,
                          std::span<const GroundTruth> samples);

// report.csv plus confusion_<dataset>.csv files.
std::string report_csv(const EvaluationReport& report);
std::string confusion_csv(const MetricsReport& metrics);
void write_report(const EvaluationReport& report, const std::filesystem::path& dir);

// level0.ucnn, degree<d>.ucnn, <name>_history.csv and hierarchy.json.
void save_hierarchy(const HierarchicalModel& model, const std::filesystem::path& dir);
HierarchicalModel load_hierarchy(const std::filesystem::path& dir);

}  // namespace lcr

#endif  // LCR_HIERARCHY_HPP_
