#include "robustkit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "robustkit/error.hpp"
#include "robustkit/rng.hpp"

namespace robustkit {

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

std::uint32_t read_be32(const unsigned char* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

}  // namespace

void Dataset::validate() const {
  if (inputs.size() != labels.size()) {
    throw ContractError("dataset '" + name + "': " + std::to_string(inputs.size()) +
                        " inputs vs " + std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) {
      throw ContractError("dataset '" + name + "': label " + std::to_string(labels[i]) +
                          " at index " + std::to_string(i) + " exceeds num_classes");
    }
  }
  std::size_t dim = input_dim();
  for (const Tensor& x : inputs) {
    if (x.size() != dim) throw ContractError("dataset '" + name + "': ragged input dims");
    for (double v : x.data) {
      if (v < 0.0 || v > 1.0) {
        throw ContractError("dataset '" + name + "': input value " + std::to_string(v) +
                            " outside [0,1]");
      }
    }
  }
}

Dataset load_cifar10_binary(const std::string& path) {
  constexpr std::size_t kRecord = 3073;
  constexpr std::size_t kPixels = 3072;
  std::vector<unsigned char> bytes = read_file(path);
  if (bytes.empty() || bytes.size() % kRecord != 0) {
    throw FormatError("cifar10: file size " + std::to_string(bytes.size()) +
                      " is not a positive multiple of " + std::to_string(kRecord) + ": " + path);
  }
  Dataset ds;
  ds.name = "cifar10";
  ds.num_classes = 10;
  ds.source_checksum = fnv1a(bytes.data(), bytes.size());
  std::size_t count = bytes.size() / kRecord;
  ds.inputs.reserve(count);
  ds.labels.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    const unsigned char* rec = bytes.data() + r * kRecord;
    if (rec[0] > 9) {
      throw FormatError("cifar10: label byte " + std::to_string(rec[0]) + " > 9 in record " +
                        std::to_string(r));
    }
    ds.labels.push_back(rec[0]);
    Tensor x = Tensor::zeros({kPixels});
    for (std::size_t i = 0; i < kPixels; ++i) {
      x.data[i] = static_cast<double>(rec[1 + i]) / 255.0;
    }
    ds.inputs.push_back(std::move(x));
  }
  return ds;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::vector<unsigned char> img = read_file(images_path);
  std::vector<unsigned char> lab = read_file(labels_path);
  if (img.size() < 16 || read_be32(img.data()) != 0x00000803u) {
    throw FormatError("idx: bad image magic in " + images_path);
  }
  if (lab.size() < 8 || read_be32(lab.data()) != 0x00000801u) {
    throw FormatError("idx: bad label magic in " + labels_path);
  }
  std::size_t n_img = read_be32(img.data() + 4);
  std::size_t rows = read_be32(img.data() + 8);
  std::size_t cols = read_be32(img.data() + 12);
  std::size_t n_lab = read_be32(lab.data() + 4);
  if (n_img != n_lab) {
    throw FormatError("idx: image count " + std::to_string(n_img) + " != label count " +
                      std::to_string(n_lab));
  }
  std::size_t pixels = rows * cols;
  if (img.size() != 16 + n_img * pixels) {
    throw FormatError("idx: image payload is " + std::to_string(img.size() - 16) +
                      " bytes, expected " + std::to_string(n_img * pixels));
  }
  if (lab.size() != 8 + n_lab) {
    throw FormatError("idx: label payload is " + std::to_string(lab.size() - 8) +
                      " bytes, expected " + std::to_string(n_lab));
  }
  Dataset ds;
  ds.name = "idx";
  std::size_t max_label = 0;
  for (std::size_t i = 0; i < n_lab; ++i) max_label = std::max<std::size_t>(max_label, lab[8 + i]);
  ds.num_classes = max_label + 1 < 2 ? 2 : max_label + 1;
  std::uint64_t h = fnv1a(img.data(), img.size());
  // combine both file hashes so either file changing changes the checksum
  std::uint64_t h2 = fnv1a(lab.data(), lab.size());
  ds.source_checksum = h ^ (h2 * 0x100000001b3ULL);
  ds.inputs.reserve(n_img);
  ds.labels.reserve(n_lab);
  for (std::size_t i = 0; i < n_img; ++i) {
    Tensor x = Tensor::zeros({pixels});
    const unsigned char* p = img.data() + 16 + i * pixels;
    for (std::size_t j = 0; j < pixels; ++j) x.data[j] = static_cast<double>(p[j]) / 255.0;
    ds.inputs.push_back(std::move(x));
    ds.labels.push_back(lab[8 + i]);
  }
  return ds;
}

TwoGaussians gen_two_gaussians(std::size_t n, std::size_t dim, double margin, double sigma,
                               std::uint64_t seed) {
  if (n == 0 || n % 2 != 0) throw ContractError("gen_two_gaussians: n must be even and positive");
  if (dim < 2) throw ContractError("gen_two_gaussians: dim must be >= 2");
  if (margin <= 0.0 || sigma <= 0.0) {
    throw ContractError("gen_two_gaussians: margin and sigma must be positive");
  }
  TwoGaussians out;
  out.margin = margin;
  out.sigma = sigma;
  double half = margin / 2.0;
  double hi = half + 4.0 * sigma;
  double lo = -hi;
  out.scale = 1.0 / (hi - lo);
  out.offset = -lo * out.scale;

  Dataset& ds = out.data;
  ds.name = "two_gaussians";
  ds.num_classes = 2;
  ds.inputs.reserve(n);
  ds.labels.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t label = i % 2;  // interleaved, so every prefix is balanced
    double mean1 = (label == 0) ? half : -half;
    Tensor x = Tensor::zeros({dim});
    for (std::size_t d = 0; d < dim; ++d) {
      double raw = (d == 0 ? mean1 : 0.0) + sigma * rng.normal();
      raw = std::clamp(raw, lo, hi);
      x.data[d] = raw * out.scale + out.offset;
    }
    ds.inputs.push_back(std::move(x));
    ds.labels.push_back(label);
  }
  ds.source_checksum = dataset_content_hash(ds);
  return out;
}

Tensor TwoGaussians::bayes_weight() const {
  Tensor w = Tensor::zeros({data.input_dim()});
  w.data[0] = 1.0;
  return w;
}

void SplitFractions::validate() const {
  if (train < 0.0 || val < 0.0 || test < 0.0 || std::abs(train + val + test - 1.0) > 1e-9) {
    throw ContractError("split: fractions must be a simplex over {train, val, test}");
  }
}

DatasetSplit split_dataset(const Dataset& data, const SplitFractions& fractions,
                           std::uint64_t seed) {
  fractions.validate();
  std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  // Fisher-Yates with the toolkit PRNG; std::shuffle is implementation-defined.
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::size_t n_val = static_cast<std::size_t>(std::floor(fractions.val * static_cast<double>(n)));
  std::size_t n_test =
      static_cast<std::size_t>(std::floor(fractions.test * static_cast<double>(n)));
  std::size_t n_train_floor =
      static_cast<std::size_t>(std::floor(fractions.train * static_cast<double>(n)));
  std::size_t n_train = n - n_val - n_test;  // remainder goes to train
  auto check_nonempty = [&](double frac, std::size_t count, const char* which) {
    if (frac > 0.0 && count == 0) {
      throw ContractError(std::string("split: fraction for ") + which +
                          " rounds to an empty split at n=" + std::to_string(n));
    }
  };
  check_nonempty(fractions.train, n_train_floor, "train");
  check_nonempty(fractions.val, n_val, "val");
  check_nonempty(fractions.test, n_test, "test");

  auto take = [&](std::size_t begin, std::size_t count, const char* suffix) {
    Dataset part;
    part.num_classes = data.num_classes;
    part.name = data.name + "." + suffix;
    part.source_checksum = data.source_checksum;
    part.inputs.reserve(count);
    part.labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      part.inputs.push_back(data.inputs[order[begin + i]]);
      part.labels.push_back(data.labels[order[begin + i]]);
    }
    return part;
  };
  DatasetSplit out;
  out.train = take(0, n_train, "train");
  out.val = take(n_train, n_val, "val");
  out.test = take(n_train + n_val, n_test, "test");
  return out;
}

std::uint64_t fnv1a(const unsigned char* p, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t dataset_content_hash(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix_bytes = [&h](const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  std::uint64_t nc = data.num_classes;
  mix_bytes(&nc, sizeof(nc));
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint64_t lab = data.labels[i];
    mix_bytes(&lab, sizeof(lab));
    mix_bytes(data.inputs[i].data.data(), data.inputs[i].data.size() * sizeof(double));
  }
  return h;
}

}  // namespace robustkit
