#ifndef LCR_NN_TRAIN_HPP_
#define LCR_NN_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "lcr/dataset.hpp"
#include "lcr/nn/network.hpp"
#include "lcr/nn/optim.hpp"
#include "lcr/raster.hpp"

namespace lcr::nn {

enum class Precision { f32, f64 };

Precision parse_precision(std::string_view text);

struct TrainConfig {
  int epochs = 1;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::rmsprop;
  int batch_size = 32;
  std::vector<double> class_weights;  // indexed by label; empty means all 1
  std::optional<AugmentParams> augment;
  std::uint64_t seed = 0;
  int threads = 1;  // never changes results, only speed
};

void validate_train_config(const TrainConfig& config);

struct LabeledImages {
  std::vector<const Raster*> images;
  std::vector<int> labels;  // 0 .. classes-1
};

struct TrainData {
  LabeledImages train;
  LabeledImages val;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainedModel {
  ModelSpec spec;
  std::vector<Tensor<double>> params;
  std::vector<EpochRecord> history;
  int best_epoch = 0;

  int num_classes() const;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch training. Each batch is cut into a fixed number of contiguous
// chunks whose gradients are summed in chunk order, so the result does not
// depend on `threads`. The parameters of the best validation epoch are kept
// (the last epoch's when there is no validation data).
template <typename T>
TrainedModel train(const ModelSpec& spec, const TrainData& data,
                   const TrainConfig& config, const EpochCallback& on_epoch = {});

TrainedModel train(const ModelSpec& spec, const TrainData& data,
                   const TrainConfig& config, Precision precision,
                   const EpochCallback& on_epoch = {});

template <typename T>
Network<T> instantiate(const TrainedModel& model);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<int> predictions;
};

template <typename T>
Evaluation evaluate_images(const Network<T>& net, const LabeledImages& set,
                           std::span<const double> class_weights = {},
                           int batch_size = 64);

// (N, H, W, 1) batch in [0, 1] from 8-bit rasters.
template <typename T>
Tensor<T> rasters_to_tensor(std::span<const Raster* const> images);

}  // namespace lcr::nn

#endif  // LCR_NN_TRAIN_HPP_
