#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "pml/core/binary_io.hpp"
#include "pml/nn/adam.hpp"
#include "pml/nn/layers.hpp"
#include "pml/nn/loss.hpp"
#include "pml/nn/param_store.hpp"
#include "pml/nn/tensor.hpp"

using namespace pml;
using namespace pml::nn;
using pml::testing::check_layer_gradients;
using pml::testing::random_tensor;
using pml::testing::relative_error;

namespace {

constexpr double kTol = 1e-3;

}  // namespace

TEST_CASE("tensor shape handling") {
  Tensor t({2, 3, 4, 4}, 1.5);
  CHECK(t.size() == 96);
  CHECK(t.sample_size() == 48);
  CHECK(t.reshaped({2, 48}).dim(1) == 48);
  CHECK_THROWS(t.reshaped({5, 5}));
  CHECK_THROWS(Tensor({2, 2}, std::vector<double>{1.0, 2.0}));
  CHECK(shape_string({2, 3}) == "(2, 3)");
}

TEST_CASE("concat and split channels are inverse") {
  Rng rng(1);
  const Tensor a = random_tensor({2, 3, 4, 4}, rng);
  const Tensor b = random_tensor({2, 1, 4, 4}, rng);
  const Tensor j = concat_channels(a, b);
  CHECK(j.dim(1) == 4);
  Tensor a2, b2;
  split_channels(j, 3, a2, b2);
  CHECK(a2 == a);
  CHECK(b2 == b);
  CHECK_THROWS(concat_channels(a, random_tensor({2, 1, 2, 2}, rng)));
}

TEST_CASE("conv2d forward matches direct convolution") {
  Rng rng(2);
  for (int stride : {1, 2}) {
    for (int k : {1, 3, 5}) {
      Conv2d conv("c", 3, 4, k, stride, (k - 1) / 2, rng);
      const Tensor x = random_tensor({2, 3, 9, 9}, rng);
      const Tensor y = conv.forward(x, {});
      auto params = conv.parameters();
      const Tensor ref =
          testing::conv2d_direct(x, params[0]->value, params[1]->value, stride, (k - 1) / 2);
      REQUIRE(y.shape() == ref.shape());
      CHECK(relative_error(y.values(), ref.values(), 1e-9) < 1e-12);
    }
  }
}

TEST_CASE("transposed conv forward matches scatter definition") {
  Rng rng(3);
  ConvTranspose2d deconv("d", 3, 2, 3, 2, 1, 1, rng);
  const Tensor x = random_tensor({2, 3, 4, 4}, rng);
  const Tensor y = deconv.forward(x, {});
  CHECK(y.shape() == std::vector<int>{2, 2, 8, 8});
  auto params = deconv.parameters();
  const Tensor ref =
      testing::conv_transpose_direct(x, params[0]->value, params[1]->value, 2, 1, 1);
  CHECK(relative_error(y.values(), ref.values(), 1e-9) < 1e-12);
}

TEST_CASE("im2col and col2im are adjoint") {
  Rng rng(4);
  ConvGeometry g{2, 5, 6, 3, 2, 1, 0, 0};
  g.out_height = Conv2d::output_size(5, 3, 2, 1);
  g.out_width = Conv2d::output_size(6, 3, 2, 1);
  const Tensor img = random_tensor({1, 2, 5, 6}, rng);
  const Tensor cols =
      random_tensor({2 * 9, g.out_height * g.out_width}, rng);
  Tensor c1({2 * 9, g.out_height * g.out_width});
  im2col(img.data(), g, c1.data());
  Tensor i1({1, 2, 5, 6});
  col2im(cols.data(), g, i1.data());
  // <im2col(x), c> == <x, col2im(c)>
  CHECK(testing::weighted_sum(c1, cols) ==
        doctest::Approx(testing::weighted_sum(img, i1)).epsilon(1e-12));
}

TEST_CASE("layer gradients match finite differences") {
  Rng rng(5);
  SUBCASE("conv2d") {
    Conv2d conv("c", 2, 3, 3, 2, 1, rng);
    CHECK(check_layer_gradients(conv, random_tensor({2, 2, 6, 6}, rng), false).worst() < kTol);
  }
  SUBCASE("conv2d stride 1 kernel 5") {
    Conv2d conv("c", 1, 2, 5, 1, 2, rng);
    CHECK(check_layer_gradients(conv, random_tensor({1, 1, 5, 5}, rng), false).worst() < kTol);
  }
  SUBCASE("transposed conv") {
    ConvTranspose2d deconv("d", 2, 3, 3, 2, 1, 1, rng);
    CHECK(check_layer_gradients(deconv, random_tensor({2, 2, 3, 3}, rng), false).worst() <
          kTol);
  }
  SUBCASE("dense") {
    Dense dense("f", 5, 4, rng);
    CHECK(check_layer_gradients(dense, random_tensor({3, 5}, rng), false).worst() < kTol);
  }
  SUBCASE("relu") {
    Relu relu;
    CHECK(check_layer_gradients(relu, random_tensor({2, 3, 4, 4}, rng), false).worst() < kTol);
  }
  SUBCASE("elu") {
    Elu elu;
    CHECK(check_layer_gradients(elu, random_tensor({2, 3, 4, 4}, rng, -3, 2), false).worst() <
          kTol);
  }
  SUBCASE("sigmoid") {
    Sigmoid sig;
    CHECK(check_layer_gradients(sig, random_tensor({2, 10}, rng, -4, 4), false).worst() < kTol);
  }
  SUBCASE("batch norm in training") {
    BatchNorm2d bn("bn", 3);
    CHECK(check_layer_gradients(bn, random_tensor({4, 3, 3, 3}, rng), true).worst() < kTol);
  }
  SUBCASE("dropout in training") {
    Dropout drop(0.3);
    CHECK(check_layer_gradients(drop, random_tensor({4, 20}, rng), true).worst() < kTol);
  }
  SUBCASE("flatten") {
    Flatten flat;
    CHECK(check_layer_gradients(flat, random_tensor({2, 2, 3, 3}, rng), false).worst() < kTol);
  }
}

TEST_CASE("batch norm normalizes in training and uses running stats at inference") {
  Rng rng(6);
  BatchNorm2d bn("bn", 2);
  const Tensor x = random_tensor({8, 2, 4, 4}, rng, 3.0, 5.0);
  Rng mask(1);
  const Tensor y = bn.forward(x, {true, &mask});
  for (int c = 0; c < 2; ++c) {
    double mean = 0.0, sq = 0.0;
    for (int n = 0; n < 8; ++n) {
      for (int i = 0; i < 16; ++i) {
        const double v = y[(n * 2 + c) * 16 + i];
        mean += v;
        sq += v * v;
      }
    }
    mean /= 128;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sq / 128 == doctest::Approx(1.0).epsilon(1e-2));
  }
  // Fresh running stats are (0, 1): inference is almost the identity.
  BatchNorm2d fresh("bn", 2);
  const Tensor yi = fresh.forward(x, {});
  CHECK(yi[0] == doctest::Approx(x[0] / std::sqrt(1.0 + 1e-3)));
  // One training step moves the running mean 1% of the way.
  const auto buffers = bn.buffers();
  CHECK(buffers[0]->value[0] > 0.03);
  CHECK(buffers[0]->value[0] < 0.05);
}

TEST_CASE("dropout: identity at inference, seeded mask in training") {
  Rng rng(7);
  Dropout drop(0.5);
  const Tensor x = random_tensor({4, 100}, rng);
  CHECK(drop.forward(x, {}) == x);
  Rng r1(3), r2(3);
  const Tensor a = drop.forward(x, {true, &r1});
  const Tensor b = drop.forward(x, {true, &r2});
  CHECK(a == b);
  int zeros = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      ++zeros;
    } else {
      CHECK(a[i] == doctest::Approx(2.0 * x[i]));
    }
  }
  CHECK(zeros > 150);
  CHECK(zeros < 250);
  CHECK_THROWS(drop.forward(x, {true, nullptr}));
  CHECK_THROWS(Dropout(1.0));
}

TEST_CASE("sequential gradient matches finite differences") {
  Rng rng(8);
  Sequential seq;
  seq.add(std::make_unique<Conv2d>("c", 1, 2, 3, 2, 1, rng));
  seq.add(std::make_unique<BatchNorm2d>("bn", 2));
  seq.add(std::make_unique<Relu>());
  seq.add(std::make_unique<Flatten>());
  seq.add(std::make_unique<Dense>("f", 8, 3, rng));
  seq.add(std::make_unique<Dropout>(0.2));
  seq.add(std::make_unique<Dense>("o", 3, 1, rng));
  Tensor x = random_tensor({3, 1, 4, 4}, rng);
  const Tensor w = random_tensor({3, 1}, rng);
  auto loss = [&] {
    Rng m(2);
    return testing::weighted_sum(seq.forward(x, {true, &m}), w);
  };
  for (auto* p : seq.parameters()) p->grad.fill(0.0);
  {
    Rng m(2);
    seq.forward(x, {true, &m});
  }
  const Tensor gx = seq.backward(w);
  CHECK(relative_error(gx.values(), testing::numeric_gradient(loss, x.values())) < kTol);
  for (auto* p : seq.parameters()) {
    const Tensor g = p->grad;
    CHECK(relative_error(g.values(), testing::numeric_gradient(loss, p->value.values())) <
          kTol);
  }
}

TEST_CASE("losses and their gradients") {
  const Tensor p({1, 4}, std::vector<double>{0.2, 0.8, 0.5, 1.0});
  const Tensor t({1, 4}, std::vector<double>{0.0, 1.0, 0.5, 1.0});
  const LossResult mse = compute_loss(LossKind::mse, p, t);
  CHECK(mse.value == doctest::Approx((0.04 + 0.04) / 4));
  CHECK(mse.grad[0] == doctest::Approx(2 * 0.2 / 4));
  const LossResult bce = compute_loss(LossKind::bce, p, t);
  const double expected =
      -(std::log(0.8) + std::log(0.8) + 0.5 * std::log(0.5) + 0.5 * std::log(0.5) +
        std::log(1 - 1e-7)) / 4;
  CHECK(bce.value == doctest::Approx(expected).epsilon(1e-9));
  CHECK(bce.grad[3] == 0.0);

  Rng rng(9);
  Tensor q = random_tensor({2, 6}, rng, 0.05, 0.95);
  const Tensor target = random_tensor({2, 6}, rng, 0.0, 1.0);
  for (auto kind : {LossKind::mse, LossKind::bce}) {
    const Tensor g = compute_loss(kind, q, target).grad;
    const auto num = testing::numeric_gradient(
        [&] { return compute_loss(kind, q, target).value; }, q.values(), 1e-6);
    CHECK(relative_error(g.values(), num) < kTol);
  }
  CHECK(parse_loss_kind("bce") == LossKind::bce);
  CHECK_THROWS(parse_loss_kind("hinge"));
  CHECK_THROWS(compute_loss(LossKind::mse, p, Tensor({1, 3})));
}

TEST_CASE("adam first step moves each weight by the learning rate") {
  Rng rng(10);
  Dense d("f", 3, 2, rng);
  auto params = d.parameters();
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  Adam adam(params, cfg);
  const Tensor before = params[0]->value;
  adam.zero_grad();
  for (std::size_t i = 0; i < params[0]->grad.size(); ++i) {
    params[0]->grad[i] = (i % 2 == 0) ? 3.0 : -0.5;
  }
  adam.step();
  for (std::size_t i = 0; i < before.size(); ++i) {
    const double sign = (i % 2 == 0) ? -1.0 : 1.0;
    CHECK(params[0]->value[i] - before[i] == doctest::Approx(sign * 0.01).epsilon(1e-5));
  }
  CHECK(adam.steps() == 1);
}

TEST_CASE("adam minimizes a quadratic") {
  Parameter p{"x", Tensor({3}, std::vector<double>{3.0, -2.0, 1.0}), Tensor({3})};
  AdamConfig cfg;
  cfg.learning_rate = 0.05;
  Adam adam({&p}, cfg);
  for (int i = 0; i < 2000; ++i) {
    adam.zero_grad();
    for (int k = 0; k < 3; ++k) p.grad[k] = 2 * p.value[k];
    adam.step();
  }
  for (int k = 0; k < 3; ++k) CHECK(std::fabs(p.value[k]) < 1e-2);
  CHECK(gradients_finite({&p}));
  p.grad[0] = std::nan("");
  CHECK_FALSE(gradients_finite({&p}));
}

TEST_CASE("parameter file round trip and error paths") {
  Rng rng(11);
  Conv2d conv("c", 1, 2, 3, 1, 1, rng);
  BatchNorm2d bn("bn", 2);
  ParamStore store = snapshot(
      {conv.parameters()[0], conv.parameters()[1], bn.parameters()[0], bn.parameters()[1]},
      bn.buffers());
  // Make values float32-representable so the round trip is exact.
  for (auto& nt : store.tensors) {
    for (double& v : nt.tensor.values()) v = static_cast<float>(v);
  }
  const ParamFile file{NetKind::forward_unet, {64, 3, 1, 16}, store};
  const auto bytes = encode_param_file(file);
  const ParamFile back = decode_param_file(bytes);
  CHECK(back.kind == NetKind::forward_unet);
  CHECK(back.descriptor == file.descriptor);
  CHECK(back.store.checksum() == store.checksum());
  CHECK(encode_param_file(back) == bytes);

  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  CHECK_THROWS_AS(decode_param_file(truncated), TruncatedInput);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS(decode_param_file(bad));

  CHECK_THROWS_AS(store.get("missing"), std::invalid_argument);
  Conv2d wider("c", 1, 3, 3, 1, 1, rng);
  CHECK_THROWS_AS(restore(store, wider.parameters(), {}), std::invalid_argument);
  Conv2d other("c", 1, 2, 3, 1, 1, rng);
  ParamStore only_conv = snapshot(conv.parameters(), {});
  restore(only_conv, other.parameters(), {});
  CHECK(other.parameters()[0]->value == conv.parameters()[0]->value);

  const auto path = std::filesystem::temp_directory_path() / "pml_params_test.pmlw";
  save_param_file(path.string(), file);
  CHECK(load_param_file(path.string()).store.checksum() == store.checksum());
  std::filesystem::remove(path);
}
