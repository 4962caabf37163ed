#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mint/ops.hpp"
#include "mint/rng.hpp"
#include "oracles.hpp"

using namespace mint;

TEST_CASE("conv2d all-ones 3x3 sums to 9") {
  TensorR in = TensorR::full({1, 1, 3, 3}, 1.0);
  TensorR k = TensorR::full({1, 1, 3, 3}, 1.0);
  TensorR out = conv2d(in, k, 1, 0);
  REQUIRE(out.shape() == Shape{1, 1, 1, 1});
  CHECK(out[0] == 9.0);
}

TEST_CASE("conv2d identity 1x1 kernel returns the input") {
  Rng rng(3);
  TensorR in = rng.uniform_tensor({2, 1, 4, 5}, -2.0, 2.0);
  TensorR k = TensorR::full({1, 1, 1, 1}, 1.0);
  TensorR out = conv2d(in, k, 1, 0);
  CHECK(tensors_equal(out, in));
}

TEST_CASE("integer conv2d is bit-exact against the scatter oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const Index ci = rng.uniform_int(1, 4);
    const Index h = rng.uniform_int(3, 8), w = rng.uniform_int(3, 8);
    const Index co = rng.uniform_int(1, 4);
    const Index kh = rng.uniform_int(1, std::min<Index>(3, h));
    const Index kw = rng.uniform_int(1, std::min<Index>(3, w));
    const int stride = static_cast<int>(rng.uniform_int(1, 2));
    const int pad = static_cast<int>(rng.uniform_int(0, 1));
    if ((h + 2 * pad - kh) < 0 || (w + 2 * pad - kw) < 0) continue;
    TensorI in = rng.uniform_int_tensor({1, ci, h, w}, -3, 3);
    TensorI k = rng.uniform_int_tensor({co, ci, kh, kw}, -3, 3);
    TensorI got = conv2d(in, k, stride, pad);
    TensorI want = oracle::conv2d_scatter(in, k, stride, pad);
    REQUIRE(tensors_equal(got, want));
  }
}

TEST_CASE("spec example: random 1x2x5x5 vs 4x2x3x3 with padding 1") {
  Rng rng(42);
  TensorI in = rng.uniform_int_tensor({1, 2, 5, 5}, -3, 3);
  TensorI k = rng.uniform_int_tensor({4, 2, 3, 3}, -3, 3);
  CHECK(tensors_equal(conv2d(in, k, 1, 1), oracle::conv2d_scatter(in, k, 1, 1)));
}

TEST_CASE("conv2d shape errors") {
  TensorR in({1, 2, 3, 3});
  TensorR k({1, 3, 3, 3});
  CHECK_THROWS_AS(conv2d(in, k), ShapeError);
  TensorR big_kernel({1, 2, 5, 5});
  CHECK_THROWS_AS(conv2d(in, big_kernel), ShapeError);
}

TEST_CASE("max pool single window and all-zero plane") {
  TensorR in({1, 1, 2, 2}, {0.0, 1.0, 0.0, 0.0});
  TensorR out = pool2d(in, 2, 2, PoolKind::max);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == 1.0);

  TensorR zeros({1, 1, 4, 4});
  CHECK(pool2d(zeros, 2, 2, PoolKind::max).flat().abs().maxCoeff() == 0.0);
}

TEST_CASE("pooling matches the reference on random planes") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    TensorR in = rng.uniform_tensor({2, 2, 8, 8}, -1.0, 1.0);
    const int window = static_cast<int>(rng.uniform_int(1, 3));
    const int stride = static_cast<int>(rng.uniform_int(1, 3));
    CHECK(tensors_equal(pool2d(in, window, stride, PoolKind::max),
                        oracle::pool_reference(in, window, stride, true)));
    CHECK(tensors_equal(pool2d(in, window, stride, PoolKind::avg),
                        oracle::pool_reference(in, window, stride, false)));
  }
}

TEST_CASE("pool window larger than input raises") {
  TensorR in({1, 1, 2, 2});
  CHECK_THROWS_AS(pool2d(in, 3, 1, PoolKind::max), ShapeError);
}

TEST_CASE("maxpool argmax routes gradients to the winner") {
  TensorR in({1, 1, 2, 2}, {0.3, 0.9, 0.1, 0.2});
  PoolResult pr = maxpool2d_with_argmax(in, 2, 2);
  CHECK(pr.values[0] == 0.9);
  TensorR g({1, 1, 1, 1}, {2.5});
  TensorR gi = maxpool2d_backward(g, pr.argmax, in.shape());
  CHECK(gi[1] == 2.5);
  CHECK(gi[0] == 0.0);
}

TEST_CASE("saturating_cast clamps to the symmetric range") {
  CHECK(saturating_cast(5, 4) == 5);
  CHECK(saturating_cast(200, 4) == 7);
  CHECK(saturating_cast(-200, 2) == -1);
  CHECK(saturating_cast(-8, 4) == -7);  // -2^(b-1) excluded
  CHECK(saturating_cast(2147483647, 32) == 2147483647);
}

TEST_CASE("saturating_cast is idempotent") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto x = static_cast<std::int64_t>(rng.uniform_int(-(1ll << 40), 1ll << 40));
    const int bits = static_cast<int>(rng.uniform_int(2, 32));
    const std::int32_t once = saturating_cast(x, bits);
    CHECK(saturating_cast(once, bits) == once);
  }
}

TEST_CASE("rng streams are reproducible") {
  Rng a(99), b(99);
  TensorR ta = a.uniform_tensor({32}, -1.0, 1.0);
  TensorR tb = b.uniform_tensor({32}, -1.0, 1.0);
  CHECK(tensors_equal(ta, tb));
  CHECK(a.next_u64() == b.next_u64());
  Rng c(100);
  CHECK(a.next_u64() != c.next_u64());
}

TEST_CASE("tensor invariants") {
  CHECK_THROWS_AS(TensorR({0, 3}), ShapeError);
  CHECK_THROWS_AS(TensorR({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
  TensorR t({2, 3});
  CHECK(t.size() == 6);
  CHECK_THROWS_AS(t.reshaped({4, 2}), ShapeError);
}
