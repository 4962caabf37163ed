#include "mint/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace mint {

namespace {

constexpr std::uint16_t kVersion = 1;

void put_u8(std::vector<unsigned char>& b, std::uint8_t v) { b.push_back(v); }

void put_u16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(v & 0xFF);
  b.push_back((v >> 8) & 0xFF);
}

void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}

void put_u64(std::vector<unsigned char>& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}

void put_f64(std::vector<unsigned char>& b, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(b, bits);
}

struct Reader {
  const std::vector<unsigned char>& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw IoError("checkpoint truncated");
  }
  std::uint8_t u8() {
    need(1);
    return buf[pos++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = buf[pos] | (buf[pos + 1] << 8);
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

int tau_exponent(double tau) {
  const double k = -std::log2(tau);
  const auto ki = static_cast<int>(std::lround(k));
  if (ki < 0 || std::abs(std::exp2(-ki) - tau) > 1e-12)
    throw ValueError("checkpoint: leak factor must be a power of two, got " + std::to_string(tau));
  return ki;
}

struct LayerFields {
  LayerKind kind;
  int n_w, n_u;
  PoolKind pool;
  int stride, padding, window, pool_stride;
  double alpha;
  std::int32_t theta;
  Shape wshape;
};

void put_layer_header(std::vector<unsigned char>& b, const LayerFields& f) {
  put_u8(b, static_cast<std::uint8_t>(f.kind));
  put_u8(b, static_cast<std::uint8_t>(f.n_w));
  put_u8(b, static_cast<std::uint8_t>(f.n_u));
  put_u8(b, static_cast<std::uint8_t>(f.pool));
  put_u32(b, static_cast<std::uint32_t>(f.stride));
  put_u32(b, static_cast<std::uint32_t>(f.padding));
  put_u32(b, static_cast<std::uint32_t>(f.window));
  put_u32(b, static_cast<std::uint32_t>(f.pool_stride));
  put_f64(b, f.alpha);
  put_u32(b, static_cast<std::uint32_t>(f.theta));
  put_u32(b, static_cast<std::uint32_t>(f.wshape.size()));
  for (Index d : f.wshape) put_u32(b, static_cast<std::uint32_t>(d));
}

LayerFields read_layer_header(Reader& r) {
  LayerFields f;
  f.kind = static_cast<LayerKind>(r.u8());
  f.n_w = r.u8();
  f.n_u = r.u8();
  f.pool = static_cast<PoolKind>(r.u8());
  f.stride = static_cast<int>(r.u32());
  f.padding = static_cast<int>(r.u32());
  f.window = static_cast<int>(r.u32());
  f.pool_stride = static_cast<int>(r.u32());
  f.alpha = r.f64();
  f.theta = static_cast<std::int32_t>(r.u32());
  const std::uint32_t rank = r.u32();
  if (rank > 4) throw IoError("checkpoint: weight rank out of range");
  for (std::uint32_t i = 0; i < rank; ++i) f.wshape.push_back(static_cast<Index>(r.u32()));
  return f;
}

void write_file(const std::string& path, std::vector<unsigned char>& buf) {
  const std::uint32_t sum = crc32(buf.data() + 6, buf.size() - 6);
  put_u32(buf, sum);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

void put_header(std::vector<unsigned char>& b, bool quantized, ResetMode reset, int timesteps,
                int tau_shift, double v_th, const Shape& input_shape, std::size_t n_layers) {
  b.insert(b.end(), {'M', 'I', 'N', 'T'});
  put_u16(b, kVersion);
  std::uint16_t flags = 0;
  if (quantized) flags |= 1;
  if (reset == ResetMode::soft) flags |= 2;
  put_u16(b, flags);
  put_u16(b, static_cast<std::uint16_t>(timesteps));
  put_u16(b, static_cast<std::uint16_t>(tau_shift));
  put_f64(b, v_th);
  for (Index d : input_shape) put_u32(b, static_cast<std::uint32_t>(d));
  put_u32(b, static_cast<std::uint32_t>(n_layers));
}

}  // namespace

std::uint32_t crc32(const unsigned char* data, std::size_t len, std::uint32_t seed) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t c = seed ^ 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void save_checkpoint(const std::string& path, const NetworkSpec& net, const LifConfig& cfg) {
  net.validate();
  cfg.validate();
  std::vector<unsigned char> buf;
  put_header(buf, false, cfg.reset, cfg.timesteps, tau_exponent(cfg.tau), cfg.v_th,
             net.input_shape, net.layers.size());
  for (const LayerSpec& l : net.layers) {
    LayerFields f{l.kind,   32,            32,      l.pool, l.stride, l.padding,
                  l.window, l.pool_stride, l.alpha, 0,      {}};
    f.wshape = l.weights.shape();
    put_layer_header(buf, f);
    put_u64(buf, static_cast<std::uint64_t>(l.weights.size()));
    for (Index i = 0; i < l.weights.size(); ++i) put_f64(buf, l.weights[i]);
  }
  write_file(path, buf);
}

void save_checkpoint(const std::string& path, const MintNetwork& net, int timesteps) {
  if (net.layers.empty()) throw ValueError("save_checkpoint: empty network");
  std::vector<unsigned char> buf;
  put_header(buf, true, net.reset, timesteps, 1, net.v_th, net.input_shape, net.layers.size());
  for (const MintLayer& l : net.layers) {
    LayerFields f{l.kind,   l.qp.n_w,      l.qp.n_u,   l.pool, l.stride, l.padding,
                  l.window, l.pool_stride, l.qp.alpha, l.qp.theta, {}};
    f.wshape = l.w_hat.shape();
    put_layer_header(buf, f);
    put_u64(buf, static_cast<std::uint64_t>(l.w_hat.size()));
    const std::int64_t lim = l.kind == LayerKind::pool ? 0 : qlevels(l.qp.n_w);
    for (Index i = 0; i < l.w_hat.size(); ++i) {
      if (l.w_hat[i] > lim || l.w_hat[i] < -lim)
        throw ValueError("save_checkpoint: weight outside " + std::to_string(l.qp.n_w) +
                         "-bit range");
      put_u8(buf, static_cast<std::uint8_t>(static_cast<std::int8_t>(l.w_hat[i])));
    }
  }
  write_file(path, buf);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 16 || std::memcmp(buf.data(), "MINT", 4) != 0)
    throw IoError("not a MINT checkpoint: '" + path + "'");

  Reader r{buf};
  r.pos = 4;
  const std::uint16_t version = r.u16();
  if (version != kVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t stored = [&] {
    Reader tail{buf};
    tail.pos = buf.size() - 4;
    return tail.u32();
  }();
  if (crc32(buf.data() + 6, buf.size() - 10) != stored)
    throw IoError("checkpoint checksum mismatch (corrupt file): '" + path + "'");

  Checkpoint ck;
  const std::uint16_t flags = r.u16();
  ck.quantized = flags & 1;
  ck.reset = (flags & 2) ? ResetMode::soft : ResetMode::hard;
  ck.timesteps = r.u16();
  ck.tau_shift = r.u16();
  ck.v_th = r.f64();
  Shape input_shape = {static_cast<Index>(r.u32()), static_cast<Index>(r.u32()),
                       static_cast<Index>(r.u32())};
  const std::uint32_t n_layers = r.u32();

  if (!ck.quantized) {
    ck.float_net.input_shape = input_shape;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
      const LayerFields f = read_layer_header(r);
      LayerSpec l;
      l.kind = f.kind;
      l.stride = f.stride;
      l.padding = f.padding;
      l.pool = f.pool;
      l.window = f.window;
      l.pool_stride = f.pool_stride;
      l.alpha = f.alpha;
      const std::uint64_t count = r.u64();
      if (f.kind != LayerKind::pool) {
        TensorR w(f.wshape);
        if (static_cast<std::uint64_t>(w.size()) != count)
          throw IoError("checkpoint: payload size does not match weight shape");
        for (std::uint64_t k = 0; k < count; ++k) w[static_cast<Index>(k)] = r.f64();
        l.weights = std::move(w);
      }
      ck.float_net.layers.push_back(std::move(l));
    }
    ck.float_net.validate();
  } else {
    ck.mint_net.input_shape = input_shape;
    ck.mint_net.v_th = ck.v_th;
    ck.mint_net.reset = ck.reset;
    bool encoder_assigned = false;
    std::size_t last_weighted = 0;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
      const LayerFields f = read_layer_header(r);
      MintLayer l;
      l.kind = f.kind;
      l.stride = f.stride;
      l.padding = f.padding;
      l.pool = f.pool;
      l.window = f.window;
      l.pool_stride = f.pool_stride;
      const std::uint64_t count = r.u64();
      if (f.kind != LayerKind::pool) {
        l.qp.alpha = f.alpha;
        l.qp.n_w = f.n_w;
        l.qp.n_u = f.n_u;
        l.qp.theta = f.theta;
        TensorI w(f.wshape);
        if (static_cast<std::uint64_t>(w.size()) != count)
          throw IoError("checkpoint: payload size does not match weight shape");
        const std::int64_t lim = qlevels(f.n_w);
        for (std::uint64_t k = 0; k < count; ++k) {
          const auto v = static_cast<std::int8_t>(r.u8());
          if (v > lim || v < -lim) throw IoError("checkpoint: quantized weight out of range");
          w[static_cast<Index>(k)] = v;
        }
        l.w_hat = std::move(w);
        l.is_encoder = !encoder_assigned;
        encoder_assigned = true;
        l.grid = l.is_encoder ? l.qp.alpha / 255.0 : l.qp.alpha;
        last_weighted = ck.mint_net.layers.size();
      }
      ck.mint_net.layers.push_back(std::move(l));
    }
    if (!ck.mint_net.layers.empty()) ck.mint_net.layers[last_weighted].is_readout = true;
  }
  return ck;
}

}  // namespace mint
