#ifndef LCR_NN_PRESETS_HPP_
#define LCR_NN_PRESETS_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "lcr/dataset.hpp"
#include "lcr/nn/config.hpp"
#include "lcr/nn/train.hpp"

namespace lcr::nn {

// Architectures: "level0", "degree1", "degree2", "degree3". Convolutions
// whose kernel exceeds the running extent get just enough zero padding to
// produce one output, and pools are dropped once the extent is below 2,
// so every preset builds for inputs down to 8x8.
ModelSpec preset_model(std::string_view architecture, int image_px, int num_classes);

struct TrainingPreset {
  std::string name;
  std::string architecture;
  int epochs = 1;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::rmsprop;
  WeightMode weights = WeightMode::uniform;
  int batch_size = 8;
};

// The four base names plus "<name>-lr1e-4" alternates.
TrainingPreset training_preset(std::string_view name);
std::vector<std::string> preset_names();

// Class count a preset uses when no corpus is at hand (gradient checks).
int default_class_count(std::string_view architecture);

}  // namespace lcr::nn

#endif  // LCR_NN_PRESETS_HPP_
