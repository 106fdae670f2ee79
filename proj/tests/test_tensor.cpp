#include <random>

#include "core/gradcheck.hpp"
#include "core/tensor.hpp"
#include "doctest.h"

using namespace densesr;

TEST_CASE("tensor_create fills and lays out row-major") {
  auto zeros = tensor_create<float>({2, 2}, 0.0f);
  CHECK(zeros->data == std::vector<float>{0, 0, 0, 0});

  auto t = tensor_create<float>({1, 2, 2}, std::vector<float>{1, 2, 3, 4});
  CHECK(t->data[t->at3(0, 1, 0)] == 3.0f);

  CHECK_THROWS_AS(tensor_create<float>({3}, std::vector<float>{1, 2}), ShapeError);
  CHECK_THROWS_AS(tensor_create<float>({0}, 1.0f), ShapeError);
}

TEST_CASE("backward of sum gives ones") {
  auto x = tensor_create<double>({4}, std::vector<double>{1, 2, 3, 4}, true);
  Tape<double> tape;
  auto loss = sum_all(&tape, x);
  tape.backward(loss);
  CHECK(x->grad == std::vector<double>{1, 1, 1, 1});
}

TEST_CASE("backward of sum of squares gives 2x") {
  auto x = tensor_create<double>({2}, std::vector<double>{1, 2}, true);
  Tape<double> tape;
  auto loss = sum_all(&tape, mul(&tape, x, x));
  tape.backward(loss);
  CHECK(x->grad[0] == doctest::Approx(2.0));
  CHECK(x->grad[1] == doctest::Approx(4.0));
}

TEST_CASE("backward rejects non-scalar loss") {
  auto x = tensor_create<double>({3}, 1.0, true);
  Tape<double> tape;
  auto y = relu(&tape, x);
  CHECK_THROWS_AS(tape.backward(y), ContractError);
}

TEST_CASE("composite graph matches finite differences") {
  std::mt19937 rng(17);
  auto x = tensor_create<double>({3, 3});
  auto y = tensor_create<double>({3, 3});
  for (auto& v : x->data) v = uniform_range(rng, -2.0, 2.0);
  for (auto& v : y->data) v = uniform_range(rng, -2.0, 2.0);
  const double err = max_relative_error(
      [&](Tape<double>& t) {
        auto a = mul(&t, x, y);
        auto b = scale(&t, x, 0.7);
        return sum_all(&t, sigmoid(&t, add(&t, a, b)));
      },
      {x, y}, 1e-4);
  CHECK(err < 1e-5);
}

TEST_CASE("diamond graph sums both contributions") {
  // u = relu(x), v = sigmoid(x), loss = sum(u*v)
  // dloss/dx_i = relu'(x_i)*v_i + u_i*v_i*(1-v_i), hand-expanded.
  auto x = tensor_create<double>({3}, std::vector<double>{-1.5, 0.5, 2.0}, true);
  Tape<double> tape;
  auto u = relu(&tape, x);
  auto v = sigmoid(&tape, x);
  auto loss = sum_all(&tape, mul(&tape, u, v));
  tape.backward(loss);
  for (size_t i = 0; i < 3; ++i) {
    const double xv = x->data[i];
    const double s = 1.0 / (1.0 + std::exp(-xv));
    const double expected = (xv > 0 ? s : 0.0) + (xv > 0 ? xv : 0.0) * s * (1.0 - s);
    CHECK(x->grad[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("elementwise forward values") {
  auto x = tensor_create<double>({3}, std::vector<double>{-1, 0, 2});
  auto r = relu<double>(nullptr, x);
  CHECK(r->data == std::vector<double>{0, 0, 2});

  auto z = tensor_create<double>({1}, std::vector<double>{0});
  auto s = sigmoid<double>(nullptr, z);
  CHECK(s->data[0] == doctest::Approx(0.5));
}

TEST_CASE("sigmoid gradient at zero is 0.25") {
  auto x = tensor_create<double>({1}, std::vector<double>{0}, true);
  Tape<double> tape;
  auto loss = sum_all(&tape, sigmoid(&tape, x));
  tape.backward(loss);
  CHECK(x->grad[0] == doctest::Approx(0.25));
}

TEST_CASE("binary ops reject shape mismatches") {
  auto a = tensor_create<double>({2, 2});
  auto b = tensor_create<double>({4});
  CHECK_THROWS_AS(add<double>(nullptr, a, b), ShapeError);
  CHECK_THROWS_AS(mul<double>(nullptr, a, b), ShapeError);
}

TEST_CASE("repeated backward accumulates until grads are cleared") {
  auto x = tensor_create<double>({2}, std::vector<double>{3, 4}, true);
  Tape<double> tape;
  auto loss = sum_all(&tape, x);
  tape.backward(loss);
  tape.backward(loss);
  CHECK(x->grad == std::vector<double>{2, 2});
  x->zero_grad();
  tape.backward(loss);
  CHECK(x->grad == std::vector<double>{1, 1});
}

TEST_CASE("forward stays finite on finite inputs") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = tensor_create<double>({4, 4});
    auto y = tensor_create<double>({4, 4});
    for (auto& v : x->data) v = uniform_range(rng, -50.0, 50.0);
    for (auto& v : y->data) v = uniform_range(rng, -50.0, 50.0);
    auto out = sigmoid<double>(nullptr, add<double>(nullptr, relu<double>(nullptr, mul<double>(nullptr, x, y)),
                                                    scale<double>(nullptr, x, -3.0)));
    for (double v : out->data) CHECK(std::isfinite(v));
  }
}

TEST_CASE("untracked graphs skip tape recording") {
  auto x = tensor_create<double>({4});
  Tape<double> tape;
  auto y = relu(&tape, x);
  CHECK(tape.size() == 0);
  x->requires_grad = true;
  x->tracked = true;
  auto z = relu(&tape, x);
  CHECK(tape.size() == 1);
  CHECK(y->data == z->data);
}
