#include "lcr/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "lcr/hash.hpp"

namespace lcr::nn {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using RowVectorMap = Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>;
template <typename T>
using ConstRowVectorMap = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;

void require_rank4(const Shape& shape, const char* what) {
  if (shape.size() != 4)
    throw ArgumentError(std::string(what) + " expects a rank-4 NHWC tensor, got " +
                        shape_string(shape));
}

struct ConvGeometry {
  int n, h, w, c;
  int kh, kw, f;
  int sh, sw, pad;
  int oh, ow;
  int rows() const { return oh * ow; }
  int depth() const { return kh * kw * c; }
};

template <typename T>
ConvGeometry conv_geometry(const Tensor<T>& input, const Tensor<T>& filters,
                           int sh, int sw, int pad) {
  require_rank4(input.shape(), "conv2d");
  if (filters.rank() != 4)
    throw ArgumentError("conv2d filters must be (KH,KW,C,F), got " +
                        shape_string(filters.shape()));
  ConvGeometry g{input.dim(0), input.dim(1), input.dim(2), input.dim(3),
                 filters.dim(0), filters.dim(1), filters.dim(3),
                 sh, sw, pad, 0, 0};
  if (filters.dim(2) != g.c)
    throw ArgumentError("conv2d filter depth " + std::to_string(filters.dim(2)) +
                        " does not match input channels " + std::to_string(g.c));
  if (sh < 1 || sw < 1 || pad < 0)
    throw ArgumentError("conv2d stride must be >= 1 and padding >= 0");
  g.oh = window_output_extent(g.h, g.kh, sh, pad);
  g.ow = window_output_extent(g.w, g.kw, sw, pad);
  return g;
}

// Patch matrix of sample n: one row per output position, (ky, kx, c) columns.
template <typename T>
void im2col(const Tensor<T>& input, int n, const ConvGeometry& g, T* cols) {
  const T* base = input.data() + static_cast<std::size_t>(n) * g.h * g.w * g.c;
  const std::size_t depth = g.depth();
  for (int oy = 0; oy < g.oh; ++oy) {
    for (int ox = 0; ox < g.ow; ++ox) {
      T* row = cols + (static_cast<std::size_t>(oy) * g.ow + ox) * depth;
      for (int ky = 0; ky < g.kh; ++ky) {
        const int iy = oy * g.sh - g.pad + ky;
        T* dst = row + static_cast<std::size_t>(ky) * g.kw * g.c;
        if (iy < 0 || iy >= g.h) {
          std::fill(dst, dst + static_cast<std::size_t>(g.kw) * g.c, T(0));
          continue;
        }
        for (int kx = 0; kx < g.kw; ++kx, dst += g.c) {
          const int ix = ox * g.sw - g.pad + kx;
          if (ix < 0 || ix >= g.w) {
            std::fill(dst, dst + g.c, T(0));
          } else {
            std::memcpy(dst, base + (static_cast<std::size_t>(iy) * g.w + ix) * g.c,
                        sizeof(T) * g.c);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, int n, const ConvGeometry& g, Tensor<T>& dinput) {
  T* base = dinput.data() + static_cast<std::size_t>(n) * g.h * g.w * g.c;
  const std::size_t depth = g.depth();
  for (int oy = 0; oy < g.oh; ++oy) {
    for (int ox = 0; ox < g.ow; ++ox) {
      const T* row = cols + (static_cast<std::size_t>(oy) * g.ow + ox) * depth;
      for (int ky = 0; ky < g.kh; ++ky) {
        const int iy = oy * g.sh - g.pad + ky;
        if (iy < 0 || iy >= g.h) continue;
        const T* src = row + static_cast<std::size_t>(ky) * g.kw * g.c;
        for (int kx = 0; kx < g.kw; ++kx, src += g.c) {
          const int ix = ox * g.sw - g.pad + kx;
          if (ix < 0 || ix >= g.w) continue;
          T* dst = base + (static_cast<std::size_t>(iy) * g.w + ix) * g.c;
          for (int c = 0; c < g.c; ++c) dst[c] += src[c];
        }
      }
    }
  }
}

template <typename T>
std::pair<int, std::size_t> rows_and_width(const Tensor<T>& t) {
  if (t.rank() == 0) throw ArgumentError("expected a batched tensor");
  const int n = t.dim(0);
  return {n, n == 0 ? 0 : t.size() / static_cast<std::size_t>(n)};
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
  out << ']';
  return out.str();
}

int window_output_extent(int in, int kernel, int stride, int padding) {
  if (kernel < 1 || stride < 1)
    throw ArgumentError("window kernel and stride must be >= 1");
  const int span = in + 2 * padding - kernel;
  if (span < 0)
    throw ArgumentError("window of " + std::to_string(kernel) +
                        " exceeds padded input extent " +
                        std::to_string(in + 2 * padding));
  return span / stride + 1;
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& filters,
                         const Tensor<T>& bias, int stride_h, int stride_w,
                         int padding) {
  const ConvGeometry g = conv_geometry(input, filters, stride_h, stride_w, padding);
  if (static_cast<int>(bias.size()) != g.f)
    throw ArgumentError("conv2d bias length does not match filter count");
  Tensor<T> out({g.n, g.oh, g.ow, g.f});
  AlignedVector<T> cols(static_cast<std::size_t>(g.rows()) * g.depth());
  ConstMatrixMap<T> w(filters.data(), g.depth(), g.f);
  ConstRowVectorMap<T> b(bias.data(), g.f);
  for (int n = 0; n < g.n; ++n) {
    im2col(input, n, g, cols.data());
    ConstMatrixMap<T> patches(cols.data(), g.rows(), g.depth());
    MatrixMap<T> y(out.data() + static_cast<std::size_t>(n) * g.rows() * g.f,
                   g.rows(), g.f);
    y.noalias() = patches * w;
    y.rowwise() += b;
  }
  return out;
}

template <typename T>
void conv2d_backward(const Tensor<T>& input, const Tensor<T>& filters,
                     const Tensor<T>& dout, int stride_h, int stride_w,
                     int padding, Tensor<T>* dinput, Tensor<T>& dfilters,
                     Tensor<T>& dbias) {
  const ConvGeometry g = conv_geometry(input, filters, stride_h, stride_w, padding);
  if (dout.shape() != Shape{g.n, g.oh, g.ow, g.f})
    throw ArgumentError("conv2d_backward: gradient shape mismatch");
  AlignedVector<T> cols(static_cast<std::size_t>(g.rows()) * g.depth());
  AlignedVector<T> dcols(dinput ? cols.size() : 0);
  if (dinput) {
    dinput->reshape(input.shape());
    dinput->fill(T(0));
  }
  ConstMatrixMap<T> w(filters.data(), g.depth(), g.f);
  MatrixMap<T> dw(dfilters.data(), g.depth(), g.f);
  RowVectorMap<T> db(dbias.data(), g.f);
  for (int n = 0; n < g.n; ++n) {
    ConstMatrixMap<T> dy(dout.data() + static_cast<std::size_t>(n) * g.rows() * g.f,
                         g.rows(), g.f);
    im2col(input, n, g, cols.data());
    ConstMatrixMap<T> patches(cols.data(), g.rows(), g.depth());
    dw.noalias() += patches.transpose() * dy;
    db += dy.colwise().sum();
    if (dinput) {
      MatrixMap<T> dpatches(dcols.data(), g.rows(), g.depth());
      dpatches.noalias() = dy * w.transpose();
      col2im_add(dcols.data(), n, g, *dinput);
    }
  }
}

template <typename T>
Tensor<T> maxpool_forward(const Tensor<T>& input, const MaxPool& pool) {
  require_rank4(input.shape(), "maxpool");
  const int n = input.dim(0), h = input.dim(1), w = input.dim(2), c = input.dim(3);
  if (pool.pool_h > h || pool.pool_w > w)
    throw ArgumentError("pool window " + std::to_string(pool.pool_h) + "x" +
                        std::to_string(pool.pool_w) + " exceeds input " +
                        std::to_string(h) + "x" + std::to_string(w));
  const int oh = window_output_extent(h, pool.pool_h, pool.stride_h, 0);
  const int ow = window_output_extent(w, pool.pool_w, pool.stride_w, 0);
  Tensor<T> out({n, oh, ow, c});
  for (int b = 0; b < n; ++b)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        for (int ch = 0; ch < c; ++ch) {
          T best = -std::numeric_limits<T>::infinity();
          for (int py = 0; py < pool.pool_h; ++py)
            for (int px = 0; px < pool.pool_w; ++px)
              best = std::max(best, input.at(b, oy * pool.stride_h + py,
                                             ox * pool.stride_w + px, ch));
          out.at(b, oy, ox, ch) = best;
        }
  return out;
}

template <typename T>
void maxpool_backward(const Tensor<T>& input, const MaxPool& pool,
                      const Tensor<T>& dout, Tensor<T>& dinput) {
  const int n = input.dim(0), c = input.dim(3);
  const int oh = dout.dim(1), ow = dout.dim(2);
  dinput.reshape(input.shape());
  dinput.fill(T(0));
  for (int b = 0; b < n; ++b)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        for (int ch = 0; ch < c; ++ch) {
          // First maximum in window scan order wins ties.
          int by = oy * pool.stride_h, bx = ox * pool.stride_w;
          T best = input.at(b, by, bx, ch);
          for (int py = 0; py < pool.pool_h; ++py)
            for (int px = 0; px < pool.pool_w; ++px) {
              int y = oy * pool.stride_h + py, x = ox * pool.stride_w + px;
              if (input.at(b, y, x, ch) > best) {
                best = input.at(b, y, x, ch);
                by = y;
                bx = x;
              }
            }
          dinput.at(b, by, bx, ch) += dout.at(b, oy, ox, ch);
        }
}

template <typename T>
Tensor<T> activation_forward(const Tensor<T>& input, const Activation& act,
                             const Tensor<T>* srelu_params) {
  Tensor<T> out(input.shape());
  const std::size_t size = input.size();
  switch (act.kind) {
    case ActivationKind::relu:
      for (std::size_t i = 0; i < size; ++i) out[i] = std::max(input[i], T(0));
      break;
    case ActivationKind::leaky_relu: {
      const T alpha = static_cast<T>(act.alpha);
      for (std::size_t i = 0; i < size; ++i)
        out[i] = input[i] > T(0) ? input[i] : alpha * input[i];
      break;
    }
    case ActivationKind::srelu: {
      if (!srelu_params || srelu_params->rank() != 2 || srelu_params->dim(0) != 4)
        throw ArgumentError("srelu requires a (4, C) parameter tensor");
      const int c = srelu_params->dim(1);
      if (input.rank() == 0 || input.shape().back() != c)
        throw ArgumentError("srelu parameter channels do not match input");
      const T* tl = srelu_params->data();
      const T* al = tl + c;
      const T* tr = al + c;
      const T* ar = tr + c;
      for (std::size_t i = 0; i < size; ++i) {
        const int ch = static_cast<int>(i % c);
        const T x = input[i];
        switch (srelu_region(x, tl[ch], tr[ch])) {
          case 0: out[i] = tl[ch] + al[ch] * (x - tl[ch]); break;
          case 1: out[i] = x; break;
          default: out[i] = tr[ch] + ar[ch] * (x - tr[ch]); break;
        }
      }
      break;
    }
    default:
      throw ArgumentError("unknown activation kind");
  }
  return out;
}

template <typename T>
void activation_backward(const Tensor<T>& input, const Activation& act,
                         const Tensor<T>* srelu_params, const Tensor<T>& dout,
                         Tensor<T>& dinput, Tensor<T>* dparams) {
  dinput.reshape(input.shape());
  const std::size_t size = input.size();
  switch (act.kind) {
    case ActivationKind::relu:
      for (std::size_t i = 0; i < size; ++i)
        dinput[i] = input[i] > T(0) ? dout[i] : T(0);
      break;
    case ActivationKind::leaky_relu: {
      const T alpha = static_cast<T>(act.alpha);
      for (std::size_t i = 0; i < size; ++i)
        dinput[i] = input[i] > T(0) ? dout[i] : alpha * dout[i];
      break;
    }
    case ActivationKind::srelu: {
      const int c = srelu_params->dim(1);
      const T* tl = srelu_params->data();
      const T* al = tl + c;
      const T* tr = al + c;
      const T* ar = tr + c;
      T* dtl = dparams ? dparams->data() : nullptr;
      T* dal = dtl ? dtl + c : nullptr;
      T* dtr = dtl ? dal + c : nullptr;
      T* dar = dtl ? dtr + c : nullptr;
      for (std::size_t i = 0; i < size; ++i) {
        const int ch = static_cast<int>(i % c);
        const T x = input[i];
        const T g = dout[i];
        switch (srelu_region(x, tl[ch], tr[ch])) {
          case 0:
            dinput[i] = al[ch] * g;
            if (dtl) {
              dtl[ch] += (T(1) - al[ch]) * g;
              dal[ch] += (x - tl[ch]) * g;
            }
            break;
          case 1:
            dinput[i] = g;
            break;
          default:
            dinput[i] = ar[ch] * g;
            if (dtl) {
              dtr[ch] += (T(1) - ar[ch]) * g;
              dar[ch] += (x - tr[ch]) * g;
            }
            break;
        }
      }
      break;
    }
  }
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  auto [n, d] = rows_and_width(logits);
  Tensor<T> out(logits.shape());
  for (int i = 0; i < n; ++i) {
    const T* z = logits.data() + static_cast<std::size_t>(i) * d;
    T* p = out.data() + static_cast<std::size_t>(i) * d;
    const T top = *std::max_element(z, z + d);
    T sum = T(0);
    for (std::size_t j = 0; j < d; ++j) sum += (p[j] = std::exp(z[j] - top));
    for (std::size_t j = 0; j < d; ++j) p[j] /= sum;
  }
  return out;
}

template <typename T>
void softmax_backward(const Tensor<T>& probs, const Tensor<T>& dout,
                      Tensor<T>& dlogits) {
  auto [n, d] = rows_and_width(probs);
  dlogits.reshape(probs.shape());
  for (int i = 0; i < n; ++i) {
    const T* p = probs.data() + static_cast<std::size_t>(i) * d;
    const T* g = dout.data() + static_cast<std::size_t>(i) * d;
    T* dz = dlogits.data() + static_cast<std::size_t>(i) * d;
    T dot = T(0);
    for (std::size_t j = 0; j < d; ++j) dot += g[j] * p[j];
    for (std::size_t j = 0; j < d; ++j) dz[j] = p[j] * (g[j] - dot);
  }
}

template <typename T>
LossResult weighted_cross_entropy(const Tensor<T>& probs,
                                  std::span<const int> labels,
                                  std::span<const double> class_weights,
                                  Tensor<T>* dprobs) {
  auto [n, d] = rows_and_width(probs);
  if (labels.size() != static_cast<std::size_t>(n))
    throw ArgumentError("label count does not match batch size");
  if (dprobs) {
    dprobs->reshape(probs.shape());
    dprobs->fill(T(0));
  }
  LossResult result;
  if (n == 0) return result;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= d)
      throw ArgumentError("label " + std::to_string(y) + " out of range for " +
                          std::to_string(d) + " classes");
    const double w = class_weights.empty() ? 1.0 : class_weights[y];
    double p = static_cast<double>(probs[static_cast<std::size_t>(i) * d + y]);
    if (p < kProbabilityFloor) {
      p = kProbabilityFloor;
      ++result.clamped;
    }
    total += w * -std::log(p);
    if (dprobs)
      (*dprobs)[static_cast<std::size_t>(i) * d + y] =
          static_cast<T>(-w / (static_cast<double>(n) * p));
  }
  result.value = total / n;
  return result;
}

namespace {

bool dropped(std::uint64_t key, std::size_t sample, std::size_t unit, double rate) {
  return unit_double(mix_keys({key, sample, unit})) < rate;
}

}  // namespace

template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& input, double rate, Mode mode,
                          std::uint64_t key, std::size_t sample_offset) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ArgumentError("dropout rate must lie in [0, 1)");
  if (mode == Mode::infer || rate == 0.0) return input;
  auto [n, d] = rows_and_width(input);
  Tensor<T> out(input.shape());
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  for (int i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * d + j;
      out[k] = dropped(key, sample_offset + i, j, rate) ? T(0) : input[k] * scale;
    }
  return out;
}

template <typename T>
void dropout_backward(const Tensor<T>& dout, double rate, Mode mode,
                      std::uint64_t key, std::size_t sample_offset,
                      Tensor<T>& dinput) {
  if (mode == Mode::infer || rate == 0.0) {
    dinput = dout;
    return;
  }
  auto [n, d] = rows_and_width(dout);
  dinput.reshape(dout.shape());
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  for (int i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * d + j;
      dinput[k] = dropped(key, sample_offset + i, j, rate) ? T(0) : dout[k] * scale;
    }
}

template <typename T>
Tensor<T> global_avg_pool_forward(const Tensor<T>& input) {
  require_rank4(input.shape(), "global average pool");
  const int n = input.dim(0), hw = input.dim(1) * input.dim(2), c = input.dim(3);
  Tensor<T> out({n, 1, 1, c});
  for (int b = 0; b < n; ++b) {
    const T* src = input.data() + static_cast<std::size_t>(b) * hw * c;
    T* dst = out.data() + static_cast<std::size_t>(b) * c;
    for (int p = 0; p < hw; ++p)
      for (int ch = 0; ch < c; ++ch) dst[ch] += src[static_cast<std::size_t>(p) * c + ch];
    for (int ch = 0; ch < c; ++ch) dst[ch] /= static_cast<T>(hw);
  }
  return out;
}

template <typename T>
void global_avg_pool_backward(const Tensor<T>& input, const Tensor<T>& dout,
                              Tensor<T>& dinput) {
  const int n = input.dim(0), hw = input.dim(1) * input.dim(2), c = input.dim(3);
  dinput.reshape(input.shape());
  for (int b = 0; b < n; ++b) {
    const T* g = dout.data() + static_cast<std::size_t>(b) * c;
    T* dst = dinput.data() + static_cast<std::size_t>(b) * hw * c;
    for (int p = 0; p < hw; ++p)
      for (int ch = 0; ch < c; ++ch)
        dst[static_cast<std::size_t>(p) * c + ch] = g[ch] / static_cast<T>(hw);
  }
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Tensor<T>& weights,
                        const Tensor<T>& bias) {
  auto [n, d] = rows_and_width(input);
  if (weights.rank() != 2 || static_cast<std::size_t>(weights.dim(0)) != d)
    throw ArgumentError("dense weights " + shape_string(weights.shape()) +
                        " do not match input width " + std::to_string(d));
  const int units = weights.dim(1);
  Tensor<T> out({n, 1, 1, units});
  ConstMatrixMap<T> x(input.data(), n, d);
  ConstMatrixMap<T> w(weights.data(), d, units);
  MatrixMap<T> y(out.data(), n, units);
  y.noalias() = x * w;
  y.rowwise() += ConstRowVectorMap<T>(bias.data(), units);
  return out;
}

template <typename T>
void dense_backward(const Tensor<T>& input, const Tensor<T>& weights,
                    const Tensor<T>& dout, Tensor<T>* dinput,
                    Tensor<T>& dweights, Tensor<T>& dbias) {
  auto [n, d] = rows_and_width(input);
  const int units = weights.dim(1);
  ConstMatrixMap<T> x(input.data(), n, d);
  ConstMatrixMap<T> w(weights.data(), d, units);
  ConstMatrixMap<T> dy(dout.data(), n, units);
  MatrixMap<T>(dweights.data(), d, units).noalias() += x.transpose() * dy;
  RowVectorMap<T>(dbias.data(), units) += dy.colwise().sum();
  if (dinput) {
    dinput->reshape(input.shape());
    MatrixMap<T>(dinput->data(), n, d).noalias() = dy * w.transpose();
  }
}

#define LCR_INSTANTIATE_OPS(T)                                                  \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&,         \
                                    const Tensor<T>&, int, int, int);           \
  template void conv2d_backward(const Tensor<T>&, const Tensor<T>&,             \
                                const Tensor<T>&, int, int, int, Tensor<T>*,    \
                                Tensor<T>&, Tensor<T>&);                        \
  template Tensor<T> maxpool_forward(const Tensor<T>&, const MaxPool&);         \
  template void maxpool_backward(const Tensor<T>&, const MaxPool&,              \
                                 const Tensor<T>&, Tensor<T>&);                 \
  template Tensor<T> activation_forward(const Tensor<T>&, const Activation&,    \
                                        const Tensor<T>*);                      \
  template void activation_backward(const Tensor<T>&, const Activation&,        \
                                    const Tensor<T>*, const Tensor<T>&,         \
                                    Tensor<T>&, Tensor<T>*);                    \
  template Tensor<T> softmax(const Tensor<T>&);                                 \
  template void softmax_backward(const Tensor<T>&, const Tensor<T>&,            \
                                 Tensor<T>&);                                   \
  template LossResult weighted_cross_entropy(const Tensor<T>&,                  \
                                             std::span<const int>,              \
                                             std::span<const double>,           \
                                             Tensor<T>*);                       \
  template Tensor<T> dropout_forward(const Tensor<T>&, double, Mode,            \
                                     std::uint64_t, std::size_t);               \
  template void dropout_backward(const Tensor<T>&, double, Mode, std::uint64_t, \
                                 std::size_t, Tensor<T>&);                      \
  template Tensor<T> global_avg_pool_forward(const Tensor<T>&);                 \
  template void global_avg_pool_backward(const Tensor<T>&, const Tensor<T>&,    \
                                         Tensor<T>&);                           \
  template Tensor<T> dense_forward(const Tensor<T>&, const Tensor<T>&,          \
                                   const Tensor<T>&);                           \
  template void dense_backward(const Tensor<T>&, const Tensor<T>&,              \
                               const Tensor<T>&, Tensor<T>*, Tensor<T>&,        \
                               Tensor<T>&);

LCR_INSTANTIATE_OPS(float)
LCR_INSTANTIATE_OPS(double)
LCR_INSTANTIATE_OPS(long double)

}  // namespace lcr::nn
