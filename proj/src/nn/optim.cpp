#include "lcr/nn/optim.hpp"

#include <string>

namespace lcr::nn {

namespace {

template <typename T>
void prepare(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads,
             OptimizerState<T>& state, bool two_moments) {
  if (params.size() != grads.size())
    throw ArgumentError("optimizer: " + std::to_string(params.size()) +
                        " parameters but " + std::to_string(grads.size()) + " gradients");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i]->shape() != grads[i].shape())
      throw ArgumentError("optimizer: gradient " + std::to_string(i) + " has shape " +
                          shape_string(grads[i].shape()) + ", parameter has " +
                          shape_string(params[i]->shape()));
  auto init = [&](std::vector<Tensor<T>>& buf) {
    if (buf.empty()) {
      for (auto* p : params) buf.emplace_back(p->shape());
    } else if (buf.size() != params.size()) {
      throw ArgumentError("optimizer state does not match the parameter list");
    }
  };
  init(state.second);
  if (two_moments) init(state.first);
}

}  // namespace

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "rmsprop") return OptimizerKind::rmsprop;
  if (text == "adam") return OptimizerKind::adam;
  throw ArgumentError("unknown optimizer '" + std::string(text) + "'");
}

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::adam ? "adam" : "rmsprop";
}

template <typename T>
void rmsprop_step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads,
                  OptimizerState<T>& state, double lr, const RmsPropSettings& cfg) {
  prepare(params, grads, state, false);
  ++state.step;
  const T rho = static_cast<T>(cfg.rho), eps = static_cast<T>(cfg.epsilon);
  const T rate = static_cast<T>(lr);
  for (std::size_t i = 0; i < params.size(); ++i) {
    T* p = params[i]->data();
    T* s = state.second[i].data();
    const T* g = grads[i].data();
    for (std::size_t j = 0; j < grads[i].size(); ++j) {
      s[j] = rho * s[j] + (T(1) - rho) * g[j] * g[j];
      p[j] -= rate * g[j] / (std::sqrt(s[j]) + eps);
    }
  }
}

template <typename T>
void adam_step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>> grads,
               OptimizerState<T>& state, double lr, const AdamSettings& cfg) {
  prepare(params, grads, state, true);
  ++state.step;
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const T eps = static_cast<T>(cfg.epsilon), rate = static_cast<T>(lr);
  const T c1 = T(1) - static_cast<T>(std::pow(cfg.beta1, static_cast<double>(state.step)));
  const T c2 = T(1) - static_cast<T>(std::pow(cfg.beta2, static_cast<double>(state.step)));
  for (std::size_t i = 0; i < params.size(); ++i) {
    T* p = params[i]->data();
    T* m = state.first[i].data();
    T* v = state.second[i].data();
    const T* g = grads[i].data();
    for (std::size_t j = 0; j < grads[i].size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      p[j] -= rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps);
    }
  }
}

template void rmsprop_step(std::span<Tensor<float>* const>, std::span<const Tensor<float>>,
                           OptimizerState<float>&, double, const RmsPropSettings&);
template void rmsprop_step(std::span<Tensor<double>* const>, std::span<const Tensor<double>>,
                           OptimizerState<double>&, double, const RmsPropSettings&);
template void adam_step(std::span<Tensor<float>* const>, std::span<const Tensor<float>>,
                        OptimizerState<float>&, double, const AdamSettings&);
template void adam_step(std::span<Tensor<double>* const>, std::span<const Tensor<double>>,
                        OptimizerState<double>&, double, const AdamSettings&);

}  // namespace lcr::nn
