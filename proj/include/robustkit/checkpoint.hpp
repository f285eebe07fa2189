#pragma once

#include <cstdint>
#include <string>

#include "robustkit/composite.hpp"
#include "robustkit/model.hpp"

namespace robustkit {

// Binary checkpoint layout (all integers and doubles little-endian):
//   magic "RKCP" | u32 version | u8 kind (0 mlp, 1 composite) | payload |
//   u64 fnv1a checksum of everything before it.
// MLP payload: f64 train_eps, u64 init_seed, arch dims, then each tensor as
// u64 rank, dims, raw f64 data. Composite payload: f64 head_train_eps,
// u64 head_seed, both backbone payloads, then head weight and bias.
// Round-trips are bit-exact.
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class CheckpointKind : std::uint8_t { kMlp = 0, kComposite = 1 };

// Returns the content checksum written into the file.
std::uint64_t save_checkpoint(const ModelParams& model, const std::string& path);
std::uint64_t save_checkpoint(const CompositeModel& comp, const std::string& path);

CheckpointKind peek_checkpoint_kind(const std::string& path);
ModelParams load_model_checkpoint(const std::string& path);
CompositeModel load_composite_checkpoint(const std::string& path);

}  // namespace robustkit
