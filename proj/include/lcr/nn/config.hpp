#ifndef LCR_NN_CONFIG_HPP_
#define LCR_NN_CONFIG_HPP_

#include <string>
#include <variant>
#include <vector>

#include "lcr/nn/tensor.hpp"

namespace lcr::nn {

struct Conv2D {
  int filters = 1;
  int kernel_h = 1, kernel_w = 1;
  int stride_h = 1, stride_w = 1;
  int padding = 0;
  friend bool operator==(const Conv2D&, const Conv2D&) = default;
};

struct MaxPool {
  int pool_h = 2, pool_w = 2;
  int stride_h = 2, stride_w = 2;
  friend bool operator==(const MaxPool&, const MaxPool&) = default;
};

struct GlobalAveragePool {
  friend bool operator==(const GlobalAveragePool&, const GlobalAveragePool&) = default;
};

struct Dense {
  int units = 1;
  friend bool operator==(const Dense&, const Dense&) = default;
};

struct Dropout {
  double rate = 0.0;
  friend bool operator==(const Dropout&, const Dropout&) = default;
};

enum class ActivationKind { relu, leaky_relu, srelu };

struct Activation {
  ActivationKind kind = ActivationKind::relu;
  double alpha = 0.01;  // leaky_relu slope
  friend bool operator==(const Activation&, const Activation&) = default;
};

struct Softmax {
  friend bool operator==(const Softmax&, const Softmax&) = default;
};

struct LayerConfig;

// output = inner(x) + shortcut(x). The shortcut is the identity when shapes
// agree, otherwise a strided 1x1 convolution if `projection` is set.
struct Residual {
  std::vector<LayerConfig> inner;
  bool projection = false;
  friend bool operator==(const Residual&, const Residual&);
};

struct LayerConfig
    : std::variant<Conv2D, MaxPool, GlobalAveragePool, Dense, Dropout,
                   Activation, Softmax, Residual> {
  using variant::variant;
  const variant& base() const { return *this; }
  friend bool operator==(const LayerConfig& a, const LayerConfig& b) {
    return a.base() == b.base();
  }
};

inline bool operator==(const Residual& a, const Residual& b) {
  return a.projection == b.projection && a.inner == b.inner;
}

// Input extents are per sample (height, width, channels).
struct ModelSpec {
  std::string name;
  int input_h = 1, input_w = 1, input_c = 1;
  std::vector<LayerConfig> layers;

  Shape input_shape() const { return {input_h, input_w, input_c}; }
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

std::string describe(const LayerConfig& layer);

}  // namespace lcr::nn

#endif  // LCR_NN_CONFIG_HPP_
