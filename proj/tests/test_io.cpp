#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <vector>

#include "mint/checkpoint.hpp"
#include "mint/dataset.hpp"
#include "mint/equiv.hpp"
#include "mint/mint_engine.hpp"

using namespace mint;

namespace {

std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("float checkpoint round-trip is structurally identical") {
  Rng rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    RandomNetCase c = random_net_case(rng);
    TempFile f("ckpt_float_test.mint");
    save_checkpoint(f.path, c.net, c.cfg);
    Checkpoint ck = load_checkpoint(f.path);
    REQUIRE(!ck.quantized);
    CHECK(ck.timesteps == c.cfg.timesteps);
    CHECK(ck.v_th == c.cfg.v_th);
    CHECK(ck.reset == c.cfg.reset);
    CHECK(ck.float_net.input_shape == c.net.input_shape);
    REQUIRE(ck.float_net.layers.size() == c.net.layers.size());
    for (std::size_t l = 0; l < c.net.layers.size(); ++l) {
      const LayerSpec& a = c.net.layers[l];
      const LayerSpec& b = ck.float_net.layers[l];
      CHECK(a.kind == b.kind);
      CHECK(a.stride == b.stride);
      CHECK(a.padding == b.padding);
      CHECK(a.window == b.window);
      if (a.weighted()) CHECK(tensors_equal(a.weights, b.weights));
    }
  }
}

TEST_CASE("quantized checkpoint round-trip preserves the integer network") {
  Rng rng(103);
  for (int trial = 0; trial < 40; ++trial) {
    RandomNetCase c = random_net_case(rng);
    const MintNetwork q = quantize_network(c.net, c.n_w, c.n_u, c.cfg.v_th, c.cfg.reset);
    TempFile f("ckpt_quant_test.mint");
    save_checkpoint(f.path, q, c.cfg.timesteps);
    Checkpoint ck = load_checkpoint(f.path);
    REQUIRE(ck.quantized);
    CHECK(ck.mint_net.v_th == q.v_th);
    CHECK(ck.mint_net.reset == q.reset);
    REQUIRE(ck.mint_net.layers.size() == q.layers.size());
    for (std::size_t l = 0; l < q.layers.size(); ++l) {
      const MintLayer& a = q.layers[l];
      const MintLayer& b = ck.mint_net.layers[l];
      CHECK(a.kind == b.kind);
      if (a.kind == LayerKind::pool) continue;
      CHECK(a.qp.alpha == b.qp.alpha);
      CHECK(a.qp.theta == b.qp.theta);
      CHECK(a.qp.n_w == b.qp.n_w);
      CHECK(a.qp.n_u == b.qp.n_u);
      CHECK(a.grid == b.grid);
      CHECK(a.is_encoder == b.is_encoder);
      CHECK(a.is_readout == b.is_readout);
      CHECK(tensors_equal(a.w_hat, b.w_hat));
    }
    // the loaded network must behave identically
    const MintForward f1 = mint_forward(q, c.input, c.cfg.timesteps);
    const MintForward f2 = mint_forward(ck.mint_net, c.input, c.cfg.timesteps);
    CHECK(spike_records_equal(f1.record, f2.record));
  }
}

TEST_CASE("single-byte corruption is always detected") {
  Rng rng(107);
  RandomNetCase c = random_net_case(rng);
  TempFile f("ckpt_corrupt_test.mint");
  save_checkpoint(f.path, quantize_network(c.net, c.n_w, c.n_u, c.cfg.v_th), c.cfg.timesteps);
  const std::vector<unsigned char> clean = slurp(f.path);
  REQUIRE(clean.size() > 32);
  Rng pick(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<unsigned char> bad = clean;
    // corrupt any byte after magic+version, including the stored checksum
    const auto pos = static_cast<std::size_t>(pick.uniform_int(6, clean.size() - 1));
    bad[pos] ^= static_cast<unsigned char>(pick.uniform_int(1, 255));
    spit(f.path, bad);
    CHECK_THROWS_AS(load_checkpoint(f.path), IoError);
  }
}

TEST_CASE("float and quantized checkpoints differ only in flags and payload fields") {
  Rng rng(109);
  RandomNetCase c = random_net_case(rng);
  TempFile ff("ckpt_a.mint"), fq("ckpt_b.mint");
  save_checkpoint(ff.path, c.net, c.cfg);
  save_checkpoint(fq.path, quantize_network(c.net, c.n_w, c.n_u, c.cfg.v_th, c.cfg.reset),
                  c.cfg.timesteps);
  const std::vector<unsigned char> a = slurp(ff.path);
  const std::vector<unsigned char> b = slurp(fq.path);
  // identical magic + version
  CHECK(std::equal(a.begin(), a.begin() + 6, b.begin()));
  // flags word differs in exactly the quantized bit
  CHECK((a[6] | 1) == b[6]);
  // shared header after the flags: timesteps, tau shift, v_th, shape, count
  CHECK(std::equal(a.begin() + 8, a.begin() + 34, b.begin() + 8));

  Checkpoint ca = load_checkpoint(ff.path);
  Checkpoint cb = load_checkpoint(fq.path);
  REQUIRE(ca.float_net.layers.size() == cb.mint_net.layers.size());
  for (std::size_t l = 0; l < ca.float_net.layers.size(); ++l) {
    CHECK(ca.float_net.layers[l].kind == cb.mint_net.layers[l].kind);
    CHECK(ca.float_net.layers[l].stride == cb.mint_net.layers[l].stride);
    CHECK(ca.float_net.layers[l].padding == cb.mint_net.layers[l].padding);
    CHECK(ca.float_net.layers[l].window == cb.mint_net.layers[l].window);
  }
}

TEST_CASE("checkpoint error categories") {
  CHECK_THROWS_AS(load_checkpoint("no_such_file.mint"), IoError);
  TempFile f("not_a_ckpt.bin");
  spit(f.path, {'P', 'N', 'G', 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16});
  CHECK_THROWS_AS(load_checkpoint(f.path), IoError);
}

TEST_CASE("out-of-range quantized payload is rejected at save time") {
  MintNetwork net;
  net.input_shape = {1, 1, 1};
  MintLayer l;
  l.kind = LayerKind::linear;
  l.w_hat = TensorI({2, 1}, {9, 0});  // 4-bit limit is 7
  l.qp.n_w = 4;
  l.qp.n_u = 4;
  l.is_encoder = true;
  l.is_readout = true;
  net.layers.push_back(std::move(l));
  TempFile f("range_violation.mint");
  CHECK_THROWS_AS(save_checkpoint(f.path, net, 4), ValueError);
}

TEST_CASE("synthetic dataset generation is deterministic") {
  LabeledData a = synthetic_dataset(4, 16, 64, 7);
  LabeledData b = synthetic_dataset(4, 16, 64, 7);
  CHECK(tensors_equal(a.images, b.images));
  CHECK(a.labels == b.labels);
  CHECK(a.n_classes == 4);
  CHECK(a.images.flat().minCoeff() >= 0.0);
  CHECK(a.images.flat().maxCoeff() <= 1.0);

  LabeledData c = synthetic_dataset(4, 16, 64, 8);
  CHECK(!tensors_equal(a.images, c.images));

  LabeledData via_spec = load_dataset("synthetic:classes=4,dim=16,n=64,seed=7");
  CHECK(tensors_equal(a.images, via_spec.images));
  CHECK(a.labels == via_spec.labels);

  CHECK_THROWS_AS(load_dataset("synthetic:classes=4"), ValueError);       // missing n
  CHECK_THROWS_AS(load_dataset("synthetic:bogus=1,n=10"), ValueError);    // unknown key
  CHECK_THROWS_AS(load_dataset("plain_path_without_labels"), ValueError);
}

TEST_CASE("idx pair round-trip and malformed headers") {
  LabeledData data = synthetic_dataset(3, 6, 50, 11);
  TempFile fi("idx_imgs_test.idx"), fl("idx_lbls_test.idx");
  save_idx_pair(fi.path, fl.path, data);
  LabeledData back = load_idx_pair(fi.path, fl.path);
  REQUIRE(back.size() == data.size());
  CHECK(back.labels == data.labels);
  CHECK(back.n_classes == 3);
  for (Index i = 0; i < data.images.size(); ++i)  // u8 quantization on the way out
    CHECK(back.images[i] == doctest::Approx(data.images[i]).epsilon(0).scale(1).epsilon(0.004));

  LabeledData via_spec = load_dataset(fi.path + "," + fl.path);
  CHECK(via_spec.labels == back.labels);

  SUBCASE("bad image magic") {
    std::vector<unsigned char> bytes = slurp(fi.path);
    bytes[3] = 0x01;  // images magic must be 0x00000803
    spit(fi.path, bytes);
    CHECK_THROWS_AS(load_idx_pair(fi.path, fl.path), IoError);
  }
  SUBCASE("count mismatch between images and labels") {
    std::vector<unsigned char> bytes = slurp(fl.path);
    bytes[7] = static_cast<unsigned char>(bytes[7] + 1);
    spit(fl.path, bytes);
    CHECK_THROWS_AS(load_idx_pair(fi.path, fl.path), IoError);
  }
}
