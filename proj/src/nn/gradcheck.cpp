#include "lcr/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "lcr/hash.hpp"

namespace lcr::nn {

namespace {

struct Probe {
  long double loss = 0.0L;
  std::uint64_t signature = 0;
};

template <typename T>
Probe probe(const Network<T>& net, const Tensor<T>& batch, std::span<const int> labels,
            std::span<const double> weights, PassContext ctx) {
  Probe out;
  ctx.region_signature = &out.signature;
  typename Network<T>::Workspace ws;
  net.forward(batch, ctx, ws);
  const Tensor<T>& probs = ws.activations.back();
  const std::size_t d = probs.size() / labels.size();
  long double total = 0.0L;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const long double w = weights.empty() ? 1.0L : weights[labels[i]];
    long double p = probs[i * d + labels[i]];
    if (p < kProbabilityFloor) p = kProbabilityFloor;
    total += w * -std::log(p);
  }
  out.loss = total / static_cast<long double>(labels.size());
  return out;
}

double rel_error(long double ga, long double gn) {
  const long double den = std::max({std::fabs(ga), std::fabs(gn), 1e-8L});
  return static_cast<double>(std::fabs(ga - gn) / den);
}

}  // namespace

template <typename T>
GradCheckResult grad_check(const Network<T>& net, const Tensor<T>& batch,
                           std::span<const int> labels, std::span<const double> weights,
                           const GradCheckOptions& opt) {
  if constexpr (!std::is_same_v<T, double>) {
    throw PrecisionError("gradient checking requires 64-bit precision");
  } else {
    if (!(opt.epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
    const PassContext ctx{Mode::train, mix_keys({opt.seed, 0xD0u}), 0, nullptr};

    Network<double> work(net);
    std::vector<Tensor<double>> analytic = work.zero_gradients();
    work.loss(batch, labels, weights, ctx, analytic);

    auto params = work.parameters();
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t t = 0; t < params.size(); ++t)
      for (std::size_t i = 0; i < params[t]->size(); ++i) slots.emplace_back(t, i);

    GradCheckResult result;
    result.total_parameters = slots.size();
    if (slots.size() > opt.full_check_limit && opt.subsample < slots.size()) {
      // Partial Fisher-Yates; the chosen slots are then visited in order.
      const std::uint64_t key = mix_keys({opt.seed, 0x5Au});
      for (std::size_t i = 0; i < opt.subsample; ++i) {
        const std::size_t j = i + splitmix64(key ^ i) % (slots.size() - i);
        std::swap(slots[i], slots[j]);
      }
      slots.resize(opt.subsample);
      std::sort(slots.begin(), slots.end());
    }

    std::optional<Network<long double>> wide;
    std::optional<Tensor<long double>> wide_batch;
    std::vector<Tensor<long double>*> wide_params;
    std::uint64_t wide_base = 0;

    const Probe base = probe(work, batch, labels, weights, ctx);
    const double eps = opt.epsilon;
    for (const auto& [t, i] : slots) {
      double& theta = (*params[t])[i];
      const double orig = theta;
      theta = orig + eps;
      const Probe plus = probe(work, batch, labels, weights, ctx);
      theta = orig - eps;
      const Probe minus = probe(work, batch, labels, weights, ctx);
      theta = orig;
      if (plus.signature != base.signature || minus.signature != base.signature) {
        ++result.skipped_kinks;
        continue;
      }
      const long double ga = analytic[t][i];
      long double gn = (plus.loss - minus.loss) / (2.0L * eps);
      double err = rel_error(ga, gn);
      if (err > opt.refine_above) {
        if (!wide) {
          wide.emplace(work.spec());
          wide->set_parameters(work.export_parameters());
          wide_batch = tensor_cast<long double>(batch);
          wide_params = wide->parameters();
          wide_base = probe(*wide, *wide_batch, labels, weights, ctx).signature;
        }
        long double& w = (*wide_params[t])[i];
        const long double worig = w;
        w = worig + eps;
        const Probe wp = probe(*wide, *wide_batch, labels, weights, ctx);
        w = worig - eps;
        const Probe wm = probe(*wide, *wide_batch, labels, weights, ctx);
        w = worig;
        if (wp.signature != wide_base || wm.signature != wide_base) {
          ++result.skipped_kinks;
          continue;
        }
        gn = (wp.loss - wm.loss) / (2.0L * eps);
        err = rel_error(ga, gn);
      }
      ++result.checked;
      if (err > result.max_rel_error || result.worst.empty()) {
        result.max_rel_error = std::max(result.max_rel_error, err);
        if (err >= result.max_rel_error)
          result.worst = "tensor " + std::to_string(t) + ", index " + std::to_string(i);
      }
    }
    return result;
  }
}

template GradCheckResult grad_check(const Network<float>&, const Tensor<float>&,
                                    std::span<const int>, std::span<const double>,
                                    const GradCheckOptions&);
template GradCheckResult grad_check(const Network<double>&, const Tensor<double>&,
                                    std::span<const int>, std::span<const double>,
                                    const GradCheckOptions&);

}  // namespace lcr::nn
