#include "mint/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "mint/rng.hpp"

namespace mint {

namespace {

std::map<std::string, std::string> parse_kv(const std::string& body) {
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t comma = body.find(',', pos);
    if (comma == std::string::npos) comma = body.size();
    const std::string item = body.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw ValueError("synthetic spec: expected key=value, got '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
    pos = comma + 1;
  }
  return kv;
}

// 3x3 box blur, reflected borders; smooths a template so nearby pixels
// correlate and convolutions have structure to learn.
void blur_inplace(TensorR& img) {
  const Index h = img.dim(2), w = img.dim(3);
  TensorR src = img;
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      double s = 0.0;
      for (Index dy = -1; dy <= 1; ++dy)
        for (Index dx = -1; dx <= 1; ++dx) {
          const Index yy = std::clamp<Index>(y + dy, 0, h - 1);
          const Index xx = std::clamp<Index>(x + dx, 0, w - 1);
          s += src.at4(0, 0, yy, xx);
        }
      img.at4(0, 0, y, x) = s / 9.0;
    }
}

std::uint32_t read_be32(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IoError("truncated IDX header in '" + path + "'");
  return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
         (static_cast<std::uint32_t>(b[2]) << 8) | b[3];
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

LabeledData synthetic_dataset(int classes, int dim, int n, std::uint64_t seed, double noise) {
  if (classes < 2 || dim < 2 || n < classes)
    throw ValueError("synthetic_dataset: need classes >= 2, dim >= 2, n >= classes");
  Rng rng(seed);
  std::vector<TensorR> templates;
  for (int c = 0; c < classes; ++c) {
    TensorR t = rng.uniform_tensor({1, 1, dim, dim}, 0.0, 1.0);
    blur_inplace(t);
    blur_inplace(t);
    // stretch back to full contrast after blurring
    const double lo = t.flat().minCoeff(), hi = t.flat().maxCoeff();
    for (Index i = 0; i < t.size(); ++i) t[i] = (t[i] - lo) / std::max(hi - lo, 1e-9);
    templates.push_back(std::move(t));
  }

  LabeledData data;
  data.n_classes = classes;
  data.images = TensorR({n, 1, dim, dim});
  data.labels.resize(n);
  const Index len = static_cast<Index>(dim) * dim;
  for (int i = 0; i < n; ++i) {
    const int c = static_cast<int>(rng.uniform_int(0, classes - 1));
    data.labels[i] = c;
    for (Index j = 0; j < len; ++j) {
      const double v = templates[c][j] + noise * (rng.gauss() / 2.0);
      data.images[i * len + j] = std::clamp(v, 0.0, 1.0);
    }
  }
  return data;
}

LabeledData load_idx_pair(const std::string& images_path, const std::string& labels_path) {
  std::ifstream imgs(images_path, std::ios::binary);
  if (!imgs) throw IoError("cannot open IDX images '" + images_path + "'");
  if (read_be32(imgs, images_path) != 0x00000803u)
    throw IoError("bad IDX image magic in '" + images_path + "' (want 0x00000803)");
  const std::uint32_t n = read_be32(imgs, images_path);
  const std::uint32_t rows = read_be32(imgs, images_path);
  const std::uint32_t cols = read_be32(imgs, images_path);
  if (n == 0 || rows == 0 || cols == 0) throw IoError("empty IDX image file");

  std::ifstream lbls(labels_path, std::ios::binary);
  if (!lbls) throw IoError("cannot open IDX labels '" + labels_path + "'");
  if (read_be32(lbls, labels_path) != 0x00000801u)
    throw IoError("bad IDX label magic in '" + labels_path + "' (want 0x00000801)");
  const std::uint32_t n_labels = read_be32(lbls, labels_path);
  if (n_labels != n)
    throw IoError("IDX image/label count mismatch: " + std::to_string(n) + " vs " +
                  std::to_string(n_labels));

  LabeledData data;
  data.images = TensorR({static_cast<Index>(n), 1, static_cast<Index>(rows),
                         static_cast<Index>(cols)});
  data.labels.resize(n);
  std::vector<unsigned char> row(static_cast<std::size_t>(rows) * cols);
  for (std::uint32_t i = 0; i < n; ++i) {
    imgs.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!imgs) throw IoError("truncated IDX image payload");
    for (std::size_t j = 0; j < row.size(); ++j)
      data.images[static_cast<Index>(i * row.size() + j)] = row[j] / 255.0;
    const int c = lbls.get();
    if (c == EOF) throw IoError("truncated IDX label payload");
    data.labels[i] = c;
  }
  data.n_classes = 1 + *std::max_element(data.labels.begin(), data.labels.end());
  return data;
}

void save_idx_pair(const std::string& images_path, const std::string& labels_path,
                   const LabeledData& data) {
  std::ofstream imgs(images_path, std::ios::binary);
  if (!imgs) throw IoError("cannot write '" + images_path + "'");
  const Index n = data.size();
  const Index rows = data.images.dim(2), cols = data.images.dim(3);
  write_be32(imgs, 0x00000803u);
  write_be32(imgs, static_cast<std::uint32_t>(n));
  write_be32(imgs, static_cast<std::uint32_t>(rows));
  write_be32(imgs, static_cast<std::uint32_t>(cols));
  for (Index i = 0; i < data.images.size(); ++i)
    imgs.put(static_cast<char>(static_cast<unsigned char>(
        std::clamp(iround(data.images[i] * 255.0), std::int64_t{0}, std::int64_t{255}))));

  std::ofstream lbls(labels_path, std::ios::binary);
  if (!lbls) throw IoError("cannot write '" + labels_path + "'");
  write_be32(lbls, 0x00000801u);
  write_be32(lbls, static_cast<std::uint32_t>(n));
  for (int label : data.labels) lbls.put(static_cast<char>(label));
}

LabeledData load_dataset(const std::string& spec) {
  if (spec.rfind("synthetic:", 0) == 0) {
    const auto kv = parse_kv(spec.substr(10));
    auto get = [&](const std::string& key, double dflt, bool required = false) {
      auto it = kv.find(key);
      if (it == kv.end()) {
        if (required) throw ValueError("synthetic spec: missing '" + key + "'");
        return dflt;
      }
      return std::stod(it->second);
    };
    for (const auto& [k, v] : kv)
      if (k != "classes" && k != "dim" && k != "n" && k != "seed" && k != "noise")
        throw ValueError("synthetic spec: unknown key '" + k + "'");
    return synthetic_dataset(static_cast<int>(get("classes", 4)), static_cast<int>(get("dim", 16)),
                             static_cast<int>(get("n", 0, true)),
                             static_cast<std::uint64_t>(get("seed", 7)), get("noise", 0.25));
  }
  const std::size_t comma = spec.find(',');
  if (comma == std::string::npos)
    throw ValueError("dataset spec must be 'synthetic:...' or '<images.idx>,<labels.idx>'");
  return load_idx_pair(spec.substr(0, comma), spec.substr(comma + 1));
}

}  // namespace mint
