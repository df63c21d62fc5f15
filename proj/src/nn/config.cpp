#include "lcr/nn/config.hpp"

#include <sstream>

namespace lcr::nn {

std::string describe(const LayerConfig& layer) {
  std::ostringstream out;
  std::visit(
      [&](const auto& c) {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, Conv2D>) {
          out << "conv2d(" << c.filters << ", " << c.kernel_h << "x" << c.kernel_w
              << ", stride " << c.stride_h << "x" << c.stride_w << ", pad "
              << c.padding << ")";
        } else if constexpr (std::is_same_v<C, MaxPool>) {
          out << "maxpool(" << c.pool_h << "x" << c.pool_w << ", stride "
              << c.stride_h << "x" << c.stride_w << ")";
        } else if constexpr (std::is_same_v<C, GlobalAveragePool>) {
          out << "global_avg_pool";
        } else if constexpr (std::is_same_v<C, Dense>) {
          out << "dense(" << c.units << ")";
        } else if constexpr (std::is_same_v<C, Dropout>) {
          out << "dropout(" << c.rate << ")";
        } else if constexpr (std::is_same_v<C, Activation>) {
          switch (c.kind) {
            case ActivationKind::relu: out << "relu"; break;
            case ActivationKind::leaky_relu: out << "leaky_relu(" << c.alpha << ")"; break;
            case ActivationKind::srelu: out << "srelu"; break;
          }
        } else if constexpr (std::is_same_v<C, Softmax>) {
          out << "softmax";
        } else {
          out << "residual" << (c.projection ? "+proj" : "") << "[";
          for (std::size_t i = 0; i < c.inner.size(); ++i)
            out << (i ? ", " : "") << describe(c.inner[i]);
          out << "]";
        }
      },
      layer.base());
  return out.str();
}

}  // namespace lcr::nn
