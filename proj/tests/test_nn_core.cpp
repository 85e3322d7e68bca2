#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "etd/kernels.hpp"
#include "etd/model.hpp"
#include "etd/models.hpp"
#include "etd/rng.hpp"
#include "etd/serialize.hpp"
#include "etd/tensor.hpp"

using namespace etd;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

// Single softmax layer with hand-picked logits: identity weights, zero bias,
// so the input row is the logit row.
NeuralModel logit_probe_model(double temperature = 1.0) {
  NeuralModel m = init_model({2}, {softmax_output(2)}, 1);
  Tensor& w = m.params[0].tensors[0];
  w.values = {1.0, 0.0, 0.0, 1.0};
  Tensor& b = m.params[0].tensors[1];
  b.values = {0.0, 0.0};
  m.temperature = temperature;
  return m;
}

}  // namespace

TEST_CASE("tensor basics") {
  CHECK(shape_product({2, 3, 4}) == 24);
  Tensor t = Tensor::zeros({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  t.at(1, 2) = 5.0;
  CHECK(t.values[5] == 5.0);
  CHECK(t.all_finite());
  t.at(0, 1) = std::nan("");
  CHECK(!t.all_finite());
  CHECK_THROWS_AS(ensure_finite(t, "unit"), std::runtime_error);
  CHECK(Tensor::filled({3}, 2.5).values == std::vector<double>{2.5, 2.5, 2.5});
  CHECK_THROWS(Tensor({2, 2}, {1.0, 2.0, 3.0}));
  CHECK(shape_string({4, 8}) == "[4, 8]");
}

TEST_CASE("OpenMP kernels match the serial reference bitwise") {
  // The parallel kernels only split the outer loop, so every output element
  // must be produced by the identical arithmetic.
  for (auto [n, k, m] : {std::tuple<std::size_t, std::size_t, std::size_t>{1, 1, 1},
                         {3, 5, 2},
                         {17, 9, 13},
                         {64, 48, 32}}) {
    const std::vector<double> x = random_values(n * k, 11 * n + k);
    const std::vector<double> w = random_values(k * m, 7 * k + m);
    const std::vector<double> b = random_values(m, m + 3);

    std::vector<double> y1(n * m), y2(n * m);
    kernels::serial::matmul_bias(x.data(), n, k, w.data(), m, b.data(), y1.data());
    kernels::matmul_bias(x.data(), n, k, w.data(), m, b.data(), y2.data());
    CHECK(y1 == y2);

    std::vector<double> a1 = random_values(n * m, 5), a2 = a1;
    kernels::serial::matmul_acc(x.data(), n, k, w.data(), m, a1.data());
    kernels::matmul_acc(x.data(), n, k, w.data(), m, a2.data());
    CHECK(a1 == a2);

    const std::vector<double> bt = random_values(m * k, 19);
    std::vector<double> c1(n * m), c2(n * m);
    kernels::serial::matmul_a_bt(x.data(), n, k, bt.data(), m, c1.data());
    kernels::matmul_a_bt(x.data(), n, k, bt.data(), m, c2.data());
    CHECK(c1 == c2);

    const std::vector<double> d = random_values(n * m, 23);
    std::vector<double> g1(k * m, 0.0), g2(k * m, 0.0);
    kernels::serial::matmul_at_b_acc(x.data(), n, k, d.data(), m, g1.data());
    kernels::matmul_at_b_acc(x.data(), n, k, d.data(), m, g2.data());
    CHECK(g1 == g2);
  }

  const std::size_t n = 3, h = 6, w = 8, ci = 2, co = 3;
  const std::vector<double> x = random_values(n * h * w * ci, 31);
  const std::vector<double> kern = random_values(3 * 3 * ci * co, 37);
  const std::vector<double> bias = random_values(co, 41);
  std::vector<double> y1(n * h * w * co), y2(y1);
  kernels::serial::conv2d_forward(x.data(), n, h, w, ci, kern.data(), co, bias.data(),
                                  y1.data());
  kernels::conv2d_forward(x.data(), n, h, w, ci, kern.data(), co, bias.data(), y2.data());
  CHECK(y1 == y2);

  const std::vector<double> dy = random_values(n * h * w * co, 43);
  std::vector<double> dx1(n * h * w * ci, 0.0), dx2(dx1);
  kernels::serial::conv2d_backward_input(dy.data(), n, h, w, co, kern.data(), ci,
                                         dx1.data());
  kernels::conv2d_backward_input(dy.data(), n, h, w, co, kern.data(), ci, dx2.data());
  CHECK(dx1 == dx2);

  std::vector<double> dk1(3 * 3 * ci * co, 0.0), dk2(dk1), db1(co, 0.0), db2(db1);
  kernels::serial::conv2d_backward_params(x.data(), n, h, w, ci, dy.data(), co, dk1.data(),
                                          db1.data());
  kernels::conv2d_backward_params(x.data(), n, h, w, ci, dy.data(), co, dk2.data(),
                                  db2.data());
  CHECK(dk1 == dk2);
  CHECK(db1 == db2);
}

TEST_CASE("softmax forward oracles") {
  NeuralModel m = logit_probe_model();

  SUBCASE("known logit gap") {
    const Tensor p = forward(m, Tensor({1, 2}, {5.5, 0.0}));
    CHECK(p.at(0, 0) == doctest::Approx(0.99592986228410396).epsilon(1e-13));
    CHECK(p.at(0, 1) == doctest::Approx(0.0040701377158961268).epsilon(1e-13));
  }

  SUBCASE("zero logits give exactly one half") {
    const Tensor p = forward(m, Tensor({1, 2}, {0.0, 0.0}));
    CHECK(p.at(0, 0) == 0.5);
    CHECK(p.at(0, 1) == 0.5);
  }

  SUBCASE("rows sum to one") {
    Rng rng(77);
    Tensor x({8, 2}, std::vector<double>(16));
    for (double& v : x.values) v = rng.uniform(-30.0, 30.0);
    const Tensor p = forward(m, x);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(p.at(i, 0) + p.at(i, 1) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(p.at(i, 0) >= 0.0);
      CHECK(p.at(i, 1) >= 0.0);
    }
  }

  SUBCASE("temperature 100 softens the gap") {
    m.temperature = 100.0;
    const Tensor p = forward(m, Tensor({1, 2}, {1.0, 0.0}));
    CHECK(p.at(0, 0) == doctest::Approx(0.50249997916687505).epsilon(1e-13));
    CHECK(p.at(0, 1) == doctest::Approx(0.49750002083312495).epsilon(1e-13));
  }

  SUBCASE("temperature 1 equals the plain softmax formula") {
    const Tensor z({1, 2}, {1.75, -0.25});
    const Tensor p = forward(m, z);
    const double e0 = std::exp(z.values[0] - 1.75), e1 = std::exp(z.values[1] - 1.75);
    CHECK(p.at(0, 0) == doctest::Approx(e0 / (e0 + e1)).epsilon(1e-15));
    CHECK(p.at(0, 1) == doctest::Approx(e1 / (e0 + e1)).epsilon(1e-15));
  }

  SUBCASE("extreme logits stay finite") {
    const Tensor p = forward(m, Tensor({1, 2}, {1000.0, -1000.0}));
    CHECK(p.all_finite());
    CHECK(p.at(0, 0) == 1.0);
    CHECK(p.at(0, 1) == 0.0);
  }
}

TEST_CASE("cross entropy oracles") {
  SUBCASE("uniform prediction of a one-hot label costs ln 2") {
    const Tensor probs({1, 2}, {0.5, 0.5});
    const Tensor label({1, 2}, {1.0, 0.0});
    CHECK(cross_entropy(probs, label) == doctest::Approx(0.69314718055994529).epsilon(1e-15));
  }
  SUBCASE("mean over a sure row and an unsure row") {
    const Tensor probs({2, 2}, {0.5, 0.5, 1.0, 0.0});
    const Tensor labels({2, 2}, {1.0, 0.0, 1.0, 0.0});
    CHECK(cross_entropy(probs, labels) == doctest::Approx(0.34657359027997264).epsilon(1e-15));
  }
  SUBCASE("soft labels are accepted") {
    const Tensor probs({1, 2}, {0.25, 0.75});
    const Tensor labels({1, 2}, {0.4, 0.6});
    const double expect = -(0.4 * std::log(0.25) + 0.6 * std::log(0.75));
    CHECK(cross_entropy(probs, labels) == doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("probability floor keeps the loss finite") {
    const Tensor probs({1, 2}, {0.0, 1.0});
    const Tensor labels({1, 2}, {1.0, 0.0});
    const double loss = cross_entropy(probs, labels);
    CHECK(std::isfinite(loss));
    CHECK(loss == doctest::Approx(-std::log(1e-12)).epsilon(1e-14));
  }
}

TEST_CASE("dropout is the identity in infer mode") {
  NeuralModel with = init_model({4}, {dropout(0.5), softmax_output(2)}, 9);
  NeuralModel without = init_model({4}, {softmax_output(2)}, 9);
  without.params[0] = with.params[1];
  const Tensor x({2, 4}, {0.5, -1.0, 2.0, 0.25, 1.0, 1.0, 1.0, 1.0});
  const Tensor a = forward(with, x);
  const Tensor b = forward(without, x);
  CHECK(a.values == b.values);

  // Train mode actually drops: with rate 0.5 on four inputs some mask will
  // differ from identity across a few draws.
  Rng rng(123);
  bool changed = false;
  for (int trial = 0; trial < 8 && !changed; ++trial) {
    const Tensor t = forward(with, x, Mode::Train, &rng);
    changed = t.values != a.values;
  }
  CHECK(changed);
}

TEST_CASE("layer stack validation") {
  CHECK_THROWS_AS(init_model({48}, {dense(8)}, 1), std::invalid_argument);
  CHECK_THROWS_AS(init_model({48}, {reshape(7, 8), softmax_output(2)}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(init_model({48}, {lstm(4, false), softmax_output(2)}, 1),
                  std::invalid_argument);

  CHECK(layer_output_shape(dense(16), {48}) == std::vector<std::size_t>{16});
  CHECK(layer_output_shape(reshape(6, 8), {48}) == std::vector<std::size_t>{6, 8, 1});
  CHECK(layer_output_shape(conv2d(5), {6, 8, 1}) == std::vector<std::size_t>{6, 8, 5});
  CHECK(layer_output_shape(maxpool2d(), {6, 8, 5}) == std::vector<std::size_t>{3, 4, 5});
  CHECK(layer_output_shape(flatten(), {3, 4, 5}) == std::vector<std::size_t>{60});
  CHECK(layer_output_shape(lstm(7, true), {48, 1}) == std::vector<std::size_t>{48, 7});
  CHECK(layer_output_shape(lstm(7, false), {48, 1}) == std::vector<std::size_t>{7});
}

TEST_CASE("serialization round-trips bit-exactly") {
  for (Family fam : {Family::Fnn, Family::Cnn, Family::Rnn}) {
    const NeuralModel m = build_model({fam, Side::Defender, 0.125}, 42);
    const std::vector<std::uint8_t> bytes = serialize_model(m);
    const NeuralModel back = deserialize_model(bytes);
    REQUIRE(back.params.size() == m.params.size());
    CHECK(back.input_shape == m.input_shape);
    CHECK(back.temperature == m.temperature);
    for (std::size_t k = 0; k < m.params.size(); ++k) {
      REQUIRE(back.params[k].tensors.size() == m.params[k].tensors.size());
      for (std::size_t t = 0; t < m.params[k].tensors.size(); ++t) {
        CHECK(back.params[k].tensors[t].shape == m.params[k].tensors[t].shape);
        CHECK(back.params[k].tensors[t].values == m.params[k].tensors[t].values);
      }
    }
    CHECK(model_hash(back) == model_hash(m));
    CHECK(serialize_model(back) == bytes);
  }

  const NeuralModel m = build_model({Family::Fnn, Side::Attacker, 0.125}, 7);
  const std::string path =
      (std::filesystem::temp_directory_path() / "etd_roundtrip.etdm").string();
  save_model(m, path);
  const NeuralModel back = load_model(path);
  CHECK(model_hash(back) == model_hash(m));
  std::filesystem::remove(path);

  std::vector<std::uint8_t> bad = serialize_model(m);
  bad[0] = 'X';
  CHECK_THROWS(deserialize_model(bad));
}

TEST_CASE("fnv1a64 is the reference hash") {
  // Published FNV-1a test vector.
  CHECK(fnv1a64(std::string("")) == 0xcbf29ce484222325ull);
  CHECK(fnv1a64(std::string("a")) == 0xaf63dc4c8601ec8cull);
  CHECK(hex64(0xcbf29ce484222325ull) == "cbf29ce484222325");
}

TEST_CASE("gradient query counter tracks input gradients") {
  NeuralModel m = logit_probe_model();
  const std::uint64_t before = m.gradient_queries->load();
  const Tensor x({1, 2}, {0.3, -0.1});
  const Tensor y({1, 2}, {0.0, 1.0});
  (void)forward(m, x);
  CHECK(m.gradient_queries->load() == before);
  (void)input_gradient(m, x, y);
  (void)prob_input_gradient(m, x, 0);
  (void)margin_and_gradient(m, Tensor({1, 2}, {0.3, -0.1}));
  CHECK(m.gradient_queries->load() == before + 3);
}
