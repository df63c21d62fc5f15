#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "lcr/nn/layer.hpp"
#include "lcr/nn/ops.hpp"

using namespace lcr;
using namespace lcr::nn;

namespace {

Tensor<double> random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor<double> t(std::move(shape));
  for (auto& v : t.values()) v = u(rng);
  return t;
}

// Direct patch-sum convolution.
Tensor<double> naive_conv(const Tensor<double>& x, const Tensor<double>& f, const Tensor<double>& b,
                          int sh, int sw, int pad) {
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const int kh = f.dim(0), kw = f.dim(1), fo = f.dim(3);
  const int oh = (h + 2 * pad - kh) / sh + 1, ow = (w + 2 * pad - kw) / sw + 1;
  Tensor<double> y({n, oh, ow, fo});
  for (int i = 0; i < n; ++i)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        for (int o = 0; o < fo; ++o) {
          double s = b[o];
          for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx) {
              const int iy = oy * sh + ky - pad, ix = ox * sw + kx - pad;
              if (iy < 0 || ix < 0 || iy >= h || ix >= w) continue;
              for (int ch = 0; ch < c; ++ch)
                s += x.at(i, iy, ix, ch) *
                     f[((static_cast<std::size_t>(ky) * kw + kx) * c + ch) * fo + o];
            }
          y.at(i, oy, ox, o) = s;
        }
  return y;
}

void check_close(const Tensor<double>& a, const Tensor<double>& b, double tol) {
  REQUIRE(a.shape() == b.shape());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(tol));
}

}  // namespace

TEST_SUITE("nn_ops") {

TEST_CASE("conv2d examples") {
  const Tensor<double> ones({1, 3, 3, 1}, 1.0);
  const Tensor<double> box({2, 2, 1, 1}, 1.0);
  const Tensor<double> zero_bias({1}, 0.0);
  const auto y = conv2d_forward(ones, box, zero_bias, 1, 1, 0);
  CHECK(y.shape() == Shape{1, 2, 2, 1});
  for (double v : y.values()) CHECK(v == 4.0);

  std::mt19937_64 rng(1);
  const auto x = random_tensor({2, 5, 4, 3}, rng);
  Tensor<double> identity({1, 1, 3, 3}, 0.0);
  for (int c = 0; c < 3; ++c) identity[c * 3 + c] = 1.0;
  CHECK(conv2d_forward(x, identity, Tensor<double>({3}, 0.0), 1, 1, 0) == x);

  const Tensor<double> four({1, 4, 4, 1}, 1.0);
  CHECK(conv2d_forward(four, box, zero_bias, 2, 2, 0).shape() == Shape{1, 2, 2, 1});

  CHECK_THROWS_AS(conv2d_forward(ones, Tensor<double>({4, 4, 1, 1}), zero_bias, 1, 1, 0),
                  ArgumentError);
  CHECK_THROWS_AS(conv2d_forward(ones, Tensor<double>({2, 2, 2, 1}), zero_bias, 1, 1, 0),
                  ArgumentError);
}

TEST_CASE("conv2d agrees with the patch-sum oracle") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const int h = 3 + trial % 7, w = 2 + trial % 5, c = 1 + trial % 3;
    const int k = 1 + trial % 3, s = 1 + trial % 2, pad = trial % 2;
    if (h + 2 * pad < k || w + 2 * pad < k) continue;
    const auto x = random_tensor({2, h, w, c}, rng);
    const auto f = random_tensor({k, k, c, 4}, rng);
    const auto b = random_tensor({4}, rng);
    check_close(conv2d_forward(x, f, b, s, s, pad), naive_conv(x, f, b, s, s, pad), 1e-12);
  }
}

TEST_CASE("window extents follow the floor formula for every input up to 16") {
  int checked = 0;
  for (int in = 1; in <= 16; ++in)
    for (int pad = 0; pad <= 2; ++pad)
      for (int k = 1; k <= in + 2 * pad; ++k)
        for (int s = 1; s <= 4; ++s) {
          const int expect = (in + 2 * pad - k) / s + 1;
          CHECK(window_output_extent(in, k, s, pad) == expect);
          const Tensor<double> x({1, in, in, 1}, 1.0);
          const auto y = conv2d_forward(x, Tensor<double>({k, k, 1, 1}, 1.0),
                                        Tensor<double>({1}), s, s, pad);
          CHECK(y.shape() == Shape{1, expect, expect, 1});
          if (pad == 0)
            CHECK(maxpool_forward(x, MaxPool{k, k, s, s}).shape() == Shape{1, expect, expect, 1});
          ++checked;
        }
  CHECK(checked > 1000);
  CHECK_THROWS_AS(window_output_extent(3, 4, 1, 0), ArgumentError);
  CHECK_THROWS_AS(window_output_extent(3, 0, 1, 0), ArgumentError);
  CHECK_THROWS_AS(window_output_extent(3, 1, 0, 0), ArgumentError);
}

TEST_CASE("maxpool examples") {
  CHECK(maxpool_forward(Tensor<double>({1, 100, 100, 32}), MaxPool{}).shape() ==
        Shape{1, 50, 50, 32});
  const auto flat = maxpool_forward(Tensor<double>({2, 6, 6, 3}, 0.7), MaxPool{});
  for (double v : flat.values()) CHECK(v == 0.7);
  const Tensor<double> win({1, 2, 2, 1}, std::vector<double>{1, 5, 3, 2});
  CHECK(maxpool_forward(win, MaxPool{}).values()[0] == 5.0);
  CHECK_THROWS_AS(maxpool_forward(win, MaxPool{3, 3, 1, 1}), ArgumentError);
}

TEST_CASE("activations") {
  const Tensor<double> x({1, 2}, std::vector<double>{-2.0, 3.0});
  const auto relu = activation_forward(x, Activation{ActivationKind::relu});
  CHECK(relu[0] == 0.0);
  CHECK(relu[1] == 3.0);
  const auto leaky = activation_forward(x, Activation{ActivationKind::leaky_relu, 0.1});
  CHECK(leaky[0] == doctest::Approx(-0.2));
  CHECK(leaky[1] == 3.0);

  std::mt19937_64 rng(3);
  const auto r = random_tensor({4, 3, 3, 5}, rng, -4.0, 4.0);
  Tensor<double> as_relu({4, 5});
  for (int c = 0; c < 5; ++c) as_relu[10 + c] = std::numeric_limits<double>::max();
  CHECK(activation_forward(r, Activation{ActivationKind::srelu}, &as_relu) ==
        activation_forward(r, Activation{ActivationKind::relu}));

  Tensor<double> p({4, 1}, std::vector<double>{-1.0, 0.5, 2.0, 3.0});
  const Tensor<double> pts({1, 5}, std::vector<double>{-3.0, -1.0, 0.0, 2.0, 4.0});
  Tensor<double> col({5, 1});
  for (int i = 0; i < 5; ++i) col[i] = pts[i];
  const auto s = activation_forward(col, Activation{ActivationKind::srelu}, &p);
  CHECK(s[0] == doctest::Approx(-1.0 + 0.5 * (-2.0)));
  CHECK(s[1] == doctest::Approx(-1.0));
  CHECK(s[2] == 0.0);
  CHECK(s[3] == doctest::Approx(2.0));
  CHECK(s[4] == doctest::Approx(2.0 + 3.0 * 2.0));

  CHECK_THROWS_AS(activation_forward(r, Activation{ActivationKind::srelu}), ArgumentError);
  CHECK_THROWS_AS(activation_forward(r, Activation{static_cast<ActivationKind>(9)}),
                  ArgumentError);
}

TEST_CASE("softmax") {
  const auto half = softmax(Tensor<double>({1, 2}, 0.0));
  CHECK(half[0] == 0.5);
  CHECK(half[1] == 0.5);

  const auto a = softmax(Tensor<double>({1, 2}, std::vector<double>{-3.0, -1.5}));
  const auto b = softmax(Tensor<double>({1, 2}, std::vector<double>{40.0, 41.5}));
  CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-14));

  using boost::multiprecision::cpp_dec_float_50;
  const auto p = softmax(Tensor<double>({1, 3}, std::vector<double>{1.0, 2.0, 3.0}));
  cpp_dec_float_50 denom = 0;
  for (int k = 1; k <= 3; ++k) denom += exp(cpp_dec_float_50(k));
  for (int k = 1; k <= 3; ++k) {
    const double exact = static_cast<double>(exp(cpp_dec_float_50(k)) / denom);
    CHECK(std::abs(p[k - 1] - exact) < 1e-15);
  }

  std::mt19937_64 rng(4);
  const auto logits = random_tensor({64, 7}, rng, -30.0, 30.0);
  const auto probs = softmax(logits);
  for (int i = 0; i < 64; ++i) {
    double sum = 0.0;
    int am_l = 0, am_p = 0;
    for (int j = 0; j < 7; ++j) {
      sum += probs[i * 7 + j];
      if (logits[i * 7 + j] > logits[i * 7 + am_l]) am_l = j;
      if (probs[i * 7 + j] > probs[i * 7 + am_p]) am_p = j;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    CHECK(am_l == am_p);
  }
  const auto big = softmax(Tensor<double>({1, 2}, std::vector<double>{1000.0, 0.0}));
  CHECK(std::isfinite(big[1]));
}

TEST_CASE("weighted cross-entropy") {
  const Tensor<double> perfect({2, 2}, std::vector<double>{1.0, 0.0, 0.0, 1.0});
  const int labels[] = {0, 1};
  const double heavy[] = {5.0, 9.0};
  CHECK(weighted_cross_entropy(perfect, labels, heavy).value == 0.0);

  const Tensor<double> probs({2, 2}, std::vector<double>{0.5, 0.5, 0.75, 0.25});
  const double w[] = {2.0, 1.0};
  CHECK(weighted_cross_entropy(probs, labels, w).value ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));

  std::mt19937_64 rng(5);
  const auto p = softmax(random_tensor({16, 4}, rng));
  std::vector<int> y(16);
  for (int i = 0; i < 16; ++i) y[i] = i % 4;
  const double ones[] = {1.0, 1.0, 1.0, 1.0};
  double plain = 0.0;
  for (int i = 0; i < 16; ++i) plain -= std::log(p[i * 4 + y[i]]);
  plain /= 16;
  CHECK(std::abs(weighted_cross_entropy(p, y, ones).value - plain) < 1e-12);
  CHECK(std::abs(weighted_cross_entropy(p, y, {}).value - plain) < 1e-12);

  const Tensor<double> zero({1, 2}, std::vector<double>{1.0, 0.0});
  const int one[] = {1};
  const auto clamped = weighted_cross_entropy(zero, one, {});
  CHECK(clamped.clamped == 1);
  CHECK(clamped.value == doctest::Approx(-std::log(kProbabilityFloor)));

  const int bad[] = {2};
  CHECK_THROWS_AS(weighted_cross_entropy(zero, bad, {}), ArgumentError);
}

TEST_CASE("dropout") {
  std::mt19937_64 rng(6);
  const auto x = random_tensor({8, 10}, rng);
  CHECK(dropout_forward(x, 0.0, Mode::train, 1) == x);
  CHECK(dropout_forward(x, 0.6, Mode::infer, 1) == x);
  CHECK_THROWS_AS(dropout_forward(x, 1.0, Mode::train, 1), ArgumentError);

  const Tensor<double> big({1000, 1000}, 1.0);
  const auto y = dropout_forward(big, 0.25, Mode::train, 77);
  std::size_t survivors = 0;
  double mean = 0.0;
  for (double v : y.values()) {
    survivors += v != 0.0;
    mean += v;
  }
  mean /= static_cast<double>(y.size());
  CHECK(std::abs(static_cast<double>(survivors) / 1e6 - 0.75) < 0.01);
  CHECK(std::abs(mean - 1.0) < 0.02);

  // The mask depends on the global sample index, not on how the batch is cut.
  const auto full = dropout_forward(x, 0.5, Mode::train, 9);
  Tensor<double> lo({4, 10}), hi({4, 10});
  std::copy_n(x.data(), 40, lo.data());
  std::copy_n(x.data() + 40, 40, hi.data());
  const auto a = dropout_forward(lo, 0.5, Mode::train, 9, 0);
  const auto b = dropout_forward(hi, 0.5, Mode::train, 9, 4);
  for (int i = 0; i < 40; ++i) {
    CHECK(full[i] == a[i]);
    CHECK(full[40 + i] == b[i]);
  }
}

TEST_CASE("residual blocks") {
  std::mt19937_64 rng(7);
  const auto x = random_tensor({2, 5, 5, 3}, rng);
  const Residual block{{Conv2D{3, 3, 3, 1, 1, 1}, Activation{ActivationKind::relu},
                        Conv2D{3, 3, 3, 1, 1, 1}},
                       false};
  const std::vector<Tensor<double>> zeros{Tensor<double>({3, 3, 3, 3}), Tensor<double>({3}),
                                          Tensor<double>({3, 3, 3, 3}), Tensor<double>({3})};
  CHECK(residual_forward(x, block, std::span<const Tensor<double>>(zeros)) == x);

  const Residual single{{Conv2D{3, 3, 3, 1, 1, 1}}, false};
  const std::vector<Tensor<double>> biased{Tensor<double>({3, 3, 3, 3}),
                                           Tensor<double>({3}, std::vector<double>{0.5, -1.0, 2.0})};
  const auto y = residual_forward(x, single, std::span<const Tensor<double>>(biased));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i] + biased[1][i % 3]);

  const Residual shrinking{{Conv2D{3, 3, 3, 2, 2, 1}}, false};
  CHECK_THROWS_AS(residual_forward(x, shrinking, std::span<const Tensor<double>>(biased)),
                  ArgumentError);
  const Residual projected{{Conv2D{4, 3, 3, 2, 2, 1}}, true};
  std::uint64_t id = 0;
  auto layer = make_layer<double>(projected, {5, 5, 3}, id);
  CHECK(layer->output_shape() == Shape{3, 3, 4});
  CHECK(layer->parameters().size() == 4);
}

}
