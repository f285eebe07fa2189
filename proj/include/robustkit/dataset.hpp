#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robustkit/tensor.hpp"

namespace robustkit {

// Classification dataset with flattened inputs normalized into [0,1].
// Immutable after load; shareable across tasks.
struct Dataset {
  std::vector<Tensor> inputs;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;
  std::string name;
  std::optional<std::uint64_t> source_checksum;

  std::size_t size() const { return inputs.size(); }
  std::size_t input_dim() const { return inputs.empty() ? 0 : inputs[0].size(); }
  void validate() const;  // ContractError on invariant violations
};

// CIFAR-10 binary batch: records of 3073 bytes, 1 label byte then 3072
// channel-major pixel bytes. Pixels scale by 1/255.
Dataset load_cifar10_binary(const std::string& path);

// IDX image/label pair (magics 0x00000803 / 0x00000801, big-endian fields).
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Synthetic two-Gaussian binary problem: class means at +-(margin/2)*e1 with
// isotropic sigma, clipped to +-(margin/2 + 4*sigma) and affinely mapped into
// [0,1]. The Bayes-optimal separator is known by construction, which makes
// adversarial-accuracy claims independently checkable.
struct TwoGaussians {
  Dataset data;
  double margin = 0.0;  // raw-space parameters
  double sigma = 0.0;
  double scale = 1.0;   // normalized = clip(raw) * scale + offset
  double offset = 0.0;

  double normalized_margin() const { return margin * scale; }
  double normalized_sigma() const { return sigma * scale; }
  // Bayes separator in normalized coordinates as a linear predictor
  // [w.x + b, 0]: w = e1, b = -0.5 (class 0 sits above 0.5 on axis 0).
  Tensor bayes_weight() const;
  double bayes_bias() const { return -0.5; }
};

TwoGaussians gen_two_gaussians(std::size_t n, std::size_t dim, double margin, double sigma,
                               std::uint64_t seed);

struct SplitFractions {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
  void validate() const;  // simplex check
};

struct DatasetSplit {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Deterministic shuffle by seed, then partition by floor counts with the
// remainder going to train. Disjoint and exhaustive.
DatasetSplit split_dataset(const Dataset& data, const SplitFractions& fractions,
                           std::uint64_t seed);

// FNV-1a 64-bit, used for file and content checksums.
std::uint64_t fnv1a(const unsigned char* p, std::size_t n);
std::uint64_t dataset_content_hash(const Dataset& data);

}  // namespace robustkit
