#include "lcr/nn/presets.hpp"

#include <string>

namespace lcr::nn {

namespace {

constexpr int kFilters = 128;
constexpr double kDropout = 0.2;
const Activation kSrelu{ActivationKind::srelu};

// Tracks the running square extent while layers are appended.
class Builder {
 public:
  explicit Builder(int extent) : extent_(extent) {}

  void conv(int filters, int kernel, int stride = 1, int padding = 0) {
    if (extent_ + 2 * padding < kernel) padding = (kernel - extent_ + 1) / 2;
    layers_.push_back(Conv2D{filters, kernel, kernel, stride, stride, padding});
    extent_ = (extent_ + 2 * padding - kernel) / stride + 1;
  }
  void pool() {
    if (extent_ < 2) return;
    layers_.push_back(MaxPool{});
    extent_ = (extent_ - 2) / 2 + 1;
  }
  void add(LayerConfig layer) { layers_.push_back(std::move(layer)); }
  // conv3x3 / SReLU / conv3x3; stride 2 and a projection shortcut when
  // downsampling.
  void residual(int filters, bool downsample) {
    Builder inner(extent_);
    inner.conv(filters, 3, downsample ? 2 : 1, 1);
    inner.add(kSrelu);
    inner.conv(filters, 3, 1, 1);
    extent_ = inner.extent();
    layers_.push_back(Residual{inner.take(), downsample});
  }
  void head(int classes) {
    add(GlobalAveragePool{});
    add(Dropout{kDropout});
    add(Dense{classes});
    add(Softmax{});
  }

  int extent() const { return extent_; }
  std::vector<LayerConfig> take() { return std::move(layers_); }

 private:
  int extent_;
  std::vector<LayerConfig> layers_;
};

}  // namespace

ModelSpec preset_model(std::string_view architecture, int image_px, int num_classes) {
  if (image_px < 1) throw ArgumentError("image size must be positive");
  if (num_classes < 1) throw ArgumentError("class count must be >= 1");
  ModelSpec spec;
  spec.name = std::string(architecture);
  spec.input_h = spec.input_w = image_px;
  spec.input_c = 1;
  Builder b(image_px);
  if (architecture == "level0") {
    for (int i = 0; i < 2; ++i) {
      b.conv(48, 3);
      b.add(kSrelu);
      b.pool();
    }
  } else if (architecture == "degree1" || architecture == "degree2") {
    const int kernels[] = {8, 7, 6, 3};
    for (int i = 0; i < 4; ++i) {
      b.conv(kFilters, kernels[i]);
      b.add(kSrelu);
      if (i == 1 || i == 3) b.pool();
    }
  } else if (architecture == "degree3") {
    b.conv(kFilters, 3, 1, 1);
    b.add(kSrelu);
    b.pool();
    for (bool downsample : {false, true, false, true}) {
      b.residual(kFilters, downsample);
      b.add(kSrelu);
    }
  } else {
    throw ArgumentError("unknown architecture '" + std::string(architecture) +
                        "' (expected level0, degree1, degree2 or degree3)");
  }
  b.head(num_classes);
  spec.layers = b.take();
  return spec;
}

TrainingPreset training_preset(std::string_view name) {
  std::string base(name);
  bool alternate = false;
  constexpr std::string_view kSuffix = "-lr1e-4";
  if (base.size() > kSuffix.size() && base.ends_with(kSuffix)) {
    base.resize(base.size() - kSuffix.size());
    alternate = true;
  }
  TrainingPreset p;
  p.name = std::string(name);
  p.architecture = base;
  if (base == "level0") {
    p.epochs = 5;
    p.optimizer = OptimizerKind::adam;
    p.weights = WeightMode::preset;
  } else if (base == "degree1" || base == "degree2" || base == "degree3") {
    p.epochs = 25;
    p.optimizer = OptimizerKind::rmsprop;
    p.weights = WeightMode::uniform;
  } else {
    throw ArgumentError("unknown preset '" + std::string(name) + "'");
  }
  p.learning_rate = alternate ? 1e-4 : 1e-3;
  return p;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const char* base : {"level0", "degree1", "degree2", "degree3"}) {
    out.emplace_back(base);
    out.push_back(std::string(base) + "-lr1e-4");
  }
  return out;
}

int default_class_count(std::string_view architecture) {
  if (architecture == "level0") return 3;
  if (architecture == "degree1") return 19;
  if (architecture == "degree2") return 85;
  if (architecture == "degree3") return 320;
  throw ArgumentError("unknown architecture '" + std::string(architecture) + "'");
}

}  // namespace lcr::nn
