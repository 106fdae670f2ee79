#include <random>

#include "core/gradcheck.hpp"
#include "core/nn_ops.hpp"
#include "doctest.h"

using namespace densesr;

namespace {

// Independent reference: six nested loops straight from the definition,
// no padding buffer, no loop reordering.
std::vector<double> conv_reference(const Conv2dLayer<double>& layer, const TensorPtr<double>& x) {
  const int64_t cin = layer.in_channels, cout = layer.out_channels;
  const int64_t h = x->shape[1], w = x->shape[2];
  std::vector<double> out(static_cast<size_t>(cout * h * w));
  for (int64_t o = 0; o < cout; ++o) {
    for (int64_t i = 0; i < h; ++i) {
      for (int64_t j = 0; j < w; ++j) {
        double acc = layer.bias->data[static_cast<size_t>(o)];
        for (int64_t c = 0; c < cin; ++c) {
          for (int64_t dy = 0; dy < 3; ++dy) {
            for (int64_t dx = 0; dx < 3; ++dx) {
              const int64_t yy = i + dy - 1, xx = j + dx - 1;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              acc += layer.weight->data[static_cast<size_t>(((o * cin + c) * 3 + dy) * 3 + dx)] *
                     x->data[static_cast<size_t>((c * h + yy) * w + xx)];
            }
          }
        }
        out[static_cast<size_t>((o * h + i) * w + j)] = acc;
      }
    }
  }
  return out;
}

TensorPtr<double> random_chw(const Shape& shape, std::mt19937& rng) {
  auto t = tensor_create<double>(shape);
  for (auto& v : t->data) v = uniform_range(rng, -1.0, 1.0);
  return t;
}

}  // namespace

TEST_CASE("conv2d with a delta kernel is the identity") {
  Conv2dLayer<double> layer(1, 1);
  layer.weight->data[4] = 1.0;  // center tap
  auto x = tensor_create<double>({1, 3, 4}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  auto y = conv2d<double>(nullptr, layer, x);
  CHECK(y->data == x->data);
}

TEST_CASE("conv2d all-ones kernel counts taps under zero padding") {
  Conv2dLayer<double> layer(1, 1);
  for (auto& v : layer.weight->data) v = 1.0;
  auto x = tensor_create<double>({1, 3, 3}, 1.0);
  auto y = conv2d<double>(nullptr, layer, x);
  CHECK(y->data[y->at3(0, 1, 1)] == doctest::Approx(9.0));
  CHECK(y->data[y->at3(0, 0, 0)] == doctest::Approx(4.0));
  CHECK(y->data[y->at3(0, 0, 1)] == doctest::Approx(6.0));
}

TEST_CASE("conv2d matches the brute-force reference") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    const int64_t cin = 1 + static_cast<int64_t>(uniform_range(rng, 0, 3));
    const int64_t cout = 1 + static_cast<int64_t>(uniform_range(rng, 0, 3));
    const int64_t h = 1 + static_cast<int64_t>(uniform_range(rng, 0, 6));
    const int64_t w = 1 + static_cast<int64_t>(uniform_range(rng, 0, 6));
    Conv2dLayer<double> layer(cin, cout);
    for (auto& v : layer.weight->data) v = uniform_range(rng, -1.0, 1.0);
    for (auto& v : layer.bias->data) v = uniform_range(rng, -1.0, 1.0);
    auto x = random_chw({cin, h, w}, rng);
    auto got = conv2d<double>(nullptr, layer, x);
    auto want = conv_reference(layer, x);
    REQUIRE(got->data.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i) {
      CHECK(got->data[i] == doctest::Approx(want[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("conv2d preserves spatial dims and rejects channel mismatch") {
  std::mt19937 rng(5);
  Conv2dLayer<double> layer(2, 3);
  for (int64_t h : {1, 2, 5}) {
    for (int64_t w : {1, 3, 7}) {
      auto y = conv2d<double>(nullptr, layer, random_chw({2, h, w}, rng));
      CHECK(y->shape == Shape{3, h, w});
    }
  }
  CHECK_THROWS_AS(conv2d<double>(nullptr, layer, random_chw({3, 4, 4}, rng)), ShapeError);
}

TEST_CASE("concat stacks channels in list order") {
  auto a = tensor_create<double>({1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  auto b = tensor_create<double>({2, 2, 2}, std::vector<double>{5, 6, 7, 8, 9, 10, 11, 12});
  auto y = concat_channels<double>(nullptr, {a, b});
  CHECK(y->shape == Shape{3, 2, 2});
  CHECK(y->data[y->at3(0, 0, 0)] == 1.0);
  CHECK(y->data[y->at3(1, 0, 0)] == 5.0);
  CHECK(y->data[y->at3(2, 1, 1)] == 12.0);

  auto single = concat_channels<double>(nullptr, {a});
  CHECK(single->data == a->data);

  auto c = tensor_create<double>({1, 3, 2});
  CHECK_THROWS_AS(concat_channels<double>(nullptr, {a, c}), ShapeError);
}

TEST_CASE("concat backward splits the gradient by channel range") {
  auto a = tensor_create<double>({1, 2, 2}, 1.0, true);
  auto b = tensor_create<double>({2, 2, 2}, 1.0, true);
  Tape<double> tape;
  auto loss = sum_all(&tape, concat_channels<double>(&tape, {a, b}));
  tape.backward(loss);
  CHECK(a->grad == std::vector<double>(4, 1.0));
  CHECK(b->grad == std::vector<double>(8, 1.0));
}

TEST_CASE("pixel_shuffle follows the stated index map") {
  auto x = tensor_create<double>({4, 1, 1}, std::vector<double>{1, 2, 3, 4});
  auto y = pixel_shuffle<double>(nullptr, x, 2);
  CHECK(y->shape == Shape{1, 2, 2});
  CHECK(y->data == std::vector<double>{1, 2, 3, 4});  // [[a,b],[c,d]]
}

TEST_CASE("pixel_shuffle round-trips bitwise and preserves the multiset") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int64_t c = 1 + static_cast<int64_t>(uniform_range(rng, 0, 3));
    const int64_t r = 1 + static_cast<int64_t>(uniform_range(rng, 0, 2));
    const int64_t h = 1 + static_cast<int64_t>(uniform_range(rng, 0, 4));
    const int64_t w = 1 + static_cast<int64_t>(uniform_range(rng, 0, 4));
    auto x = random_chw({c * r * r, h, w}, rng);
    auto shuffled = pixel_shuffle<double>(nullptr, x, r);
    CHECK(shuffled->shape == Shape{c, h * r, w * r});
    auto restored = pixel_unshuffle<double>(nullptr, shuffled, r);
    CHECK(restored->data == x->data);

    auto sorted_in = x->data;
    auto sorted_out = shuffled->data;
    std::sort(sorted_in.begin(), sorted_in.end());
    std::sort(sorted_out.begin(), sorted_out.end());
    CHECK(sorted_in == sorted_out);
  }
}

TEST_CASE("pixel_shuffle r=1 is the identity and divisibility is enforced") {
  std::mt19937 rng(37);
  auto x = random_chw({3, 2, 2}, rng);
  auto y = pixel_shuffle<double>(nullptr, x, 1);
  CHECK(y->data == x->data);
  CHECK_THROWS_AS(pixel_shuffle<double>(nullptr, x, 2), ShapeError);
}

TEST_CASE("dense block channel ledger at paper settings") {
  DenseBlock<double> block(DenseBlockConfig{8, 16, 128});
  CHECK(block.layers.size() == 8);
  CHECK(block.layers[0].in_channels == 128);
  CHECK(block.layers[7].in_channels == 128 + 7 * 16);
  CHECK(block.layers[7].out_channels == 16);
  int64_t out_channels = 0;
  for (const auto& l : block.layers) out_channels += l.out_channels;
  CHECK(out_channels == 128);
}

TEST_CASE("dense block with m=1 reduces to relu(conv)") {
  std::mt19937 rng(41);
  DenseBlock<double> block(DenseBlockConfig{1, 4, 2});
  for (auto& v : block.layers[0].weight->data) v = uniform_range(rng, -1.0, 1.0);
  auto x = random_chw({2, 3, 3}, rng);
  auto got = dense_block_forward<double>(nullptr, block, x);
  auto want = relu<double>(nullptr, conv2d<double>(nullptr, block.layers[0], x));
  CHECK(got->data == want->data);
  CHECK(got->shape == Shape{4, 3, 3});
}

TEST_CASE("dense block rejects misconfigured layer channel counts") {
  DenseBlock<double> block(DenseBlockConfig{2, 2, 2});
  block.layers[1] = Conv2dLayer<double>(3, 2);  // should be 4 -> 2
  auto x = tensor_create<double>({2, 3, 3}, 0.5);
  CHECK_THROWS_AS(dense_block_forward<double>(nullptr, block, x), ShapeError);
}

TEST_CASE("dense block gradient matches finite differences") {
  std::mt19937 rng(43);
  DenseBlock<double> block(DenseBlockConfig{2, 2, 2});
  std::vector<TensorPtr<double>> leaves;
  for (auto& layer : block.layers) {
    for (auto& v : layer.weight->data) v = uniform_range(rng, -0.8, 0.8);
    for (auto& v : layer.bias->data) v = uniform_range(rng, 0.2, 0.5);
    leaves.push_back(layer.weight);
    leaves.push_back(layer.bias);
  }
  auto x = random_chw({2, 4, 4}, rng);
  leaves.push_back(x);
  auto proj = tensor_create<double>({4, 4, 4});
  for (auto& v : proj->data) v = uniform_range(rng, 0.5, 1.5) * (uniform_unit(rng) < 0.5 ? -1.0 : 1.0);
  const double err = max_relative_error(
      [&](Tape<double>& t) { return sum_all(&t, mul(&t, dense_block_forward(&t, block, x), proj)); },
      leaves, 1e-4);
  CHECK(err < 1e-5);
}
