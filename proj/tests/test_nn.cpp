#include <doctest.h>

#include <cmath>

#include "elemstruct/nn.hpp"

using namespace es;
using D = double;

TEST_CASE("linear layer init: weights within +-sqrt(1/fan_in), biases zero") {
  Rng rng(4);
  LinearLayer<D> layer(64, 32, rng);
  const double bound = std::sqrt(1.0 / 64.0);
  for (double w : layer.weight->values) {
    CHECK(w >= -bound);
    CHECK(w <= bound);
  }
  for (double b : layer.bias->values) CHECK(b == 0.0);
  CHECK(layer.param_count() == 64 * 32 + 32);
}

TEST_CASE("param store registers, finds and counts") {
  Rng rng(4);
  LinearLayer<D> layer(3, 2, rng);
  ParamStore<D> store;
  layer.register_params(store, "enc.mlp0");
  CHECK(store.find("enc.mlp0.weight") == layer.weight);
  CHECK(store.find("missing") == nullptr);
  CHECK(layer.weight->requires_grad);
  CHECK(store.total_count() == 8);
  CHECK(store.count_prefix("enc") == 8);
  CHECK(store.count_prefix("dec") == 0);
  store.zero_grad();
  CHECK(layer.weight->grad.size() == 6);
}

TEST_CASE("batchnorm train mode normalizes each channel") {
  BatchNorm1d<D> bn(2);
  auto x = Tensor<D>::from_values({4, 2}, {1, 10, 2, 20, 3, 30, 4, 40});
  auto y = bn(x, true);
  for (int j = 0; j < 2; ++j) {
    double mean = 0, var = 0;
    for (int i = 0; i < 4; ++i) mean += y->values[i * 2 + j];
    mean /= 4;
    for (int i = 0; i < 4; ++i) {
      double d = y->values[i * 2 + j] - mean;
      var += d * d;
    }
    var /= 4;
    CHECK(std::abs(mean) < 1e-5);
    CHECK(std::abs(var - 1.0) < 1e-4);
  }
}

TEST_CASE("batchnorm on a constant channel outputs zero via the epsilon floor") {
  BatchNorm1d<D> bn(1);
  auto x = Tensor<D>::from_values({3, 1}, {5, 5, 5});
  auto y = bn(x, true);
  for (double v : y->values) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("batchnorm eval mode is bitwise deterministic") {
  BatchNorm1d<D> bn(2);
  // move running stats off their defaults first
  auto warm = Tensor<D>::from_values({4, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  bn(warm, true);
  auto x = Tensor<D>::from_values({2, 2}, {0.3, -1.2, 2.5, 0.7});
  auto y1 = bn(x, false);
  auto y2 = bn(x, false);
  CHECK(y1->values == y2->values);
}

TEST_CASE("batchnorm rejects train-mode batches below two rows") {
  BatchNorm1d<D> bn(3);
  auto x = Tensor<D>::zeros({1, 3});
  CHECK_THROWS_AS(bn(x, true), DimensionError);
  CHECK_NOTHROW(bn(x, false));
}

TEST_CASE("batchnorm running statistics update with momentum 0.1 and unbiased variance") {
  BatchNorm1d<D> bn(1);
  auto x = Tensor<D>::from_values({2, 1}, {0, 2});  // batch mean 1, biased var 1, unbiased 2
  bn(x, true);
  CHECK((*bn.running_mean)[0] == doctest::Approx(0.9 * 0.0 + 0.1 * 1.0));
  CHECK((*bn.running_var)[0] == doctest::Approx(0.9 * 1.0 + 0.1 * 2.0));
}
