#include "robustkit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "robustkit/dataset.hpp"  // fnv1a
#include "robustkit/error.hpp"

namespace robustkit {

namespace {

constexpr char kMagic[4] = {'R', 'K', 'C', 'P'};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const void* p, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  ByteReader(const unsigned char* p, std::size_t n) : p_(p), n_(n) {}
  std::uint8_t u8() {
    need(1);
    return p_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return n_ - pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > n_) throw CorruptionError("checkpoint: truncated payload");
  }
  const unsigned char* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

void write_tensor(ByteWriter& w, const Tensor& t) {
  w.u64(t.rank());
  for (std::size_t d : t.shape) w.u64(d);
  for (double v : t.data) w.f64(v);
}

Tensor read_tensor(ByteReader& r) {
  std::size_t rank = r.u64();
  if (rank > 8) throw CorruptionError("checkpoint: implausible tensor rank");
  std::vector<std::size_t> shape(rank);
  for (std::size_t& d : shape) d = r.u64();
  std::size_t n = shape_numel(shape);
  if (n > (std::size_t{1} << 30)) throw CorruptionError("checkpoint: implausible tensor size");
  std::vector<double> data(n);
  for (double& v : data) v = r.f64();
  return Tensor(std::move(shape), std::move(data));
}

void write_mlp_payload(ByteWriter& w, const ModelParams& m) {
  w.f64(m.train_eps);
  w.u64(m.init_seed);
  w.u64(m.arch.input_dim);
  w.u64(m.arch.hidden_dims.size());
  for (std::size_t d : m.arch.hidden_dims) w.u64(d);
  w.u64(m.arch.num_classes);
  w.u64(m.weights.size());
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    write_tensor(w, m.weights[l]);
    write_tensor(w, m.biases[l]);
  }
}

ModelParams read_mlp_payload(ByteReader& r) {
  ModelParams m;
  m.train_eps = r.f64();
  m.init_seed = r.u64();
  m.arch.input_dim = r.u64();
  std::size_t hidden = r.u64();
  if (hidden > 64) throw CorruptionError("checkpoint: implausible layer count");
  m.arch.hidden_dims.resize(hidden);
  for (std::size_t& d : m.arch.hidden_dims) d = r.u64();
  m.arch.num_classes = r.u64();
  m.arch.validate();
  std::size_t layers = r.u64();
  if (layers != m.arch.layer_count()) {
    throw FormatError("checkpoint: layer count " + std::to_string(layers) +
                      " does not match architecture");
  }
  std::vector<std::size_t> dims;
  dims.push_back(m.arch.input_dim);
  dims.insert(dims.end(), m.arch.hidden_dims.begin(), m.arch.hidden_dims.end());
  dims.push_back(m.arch.num_classes);
  for (std::size_t l = 0; l < layers; ++l) {
    Tensor w = read_tensor(r);
    Tensor b = read_tensor(r);
    if (w.shape != std::vector<std::size_t>{dims[l + 1], dims[l]} ||
        b.shape != std::vector<std::size_t>{dims[l + 1]}) {
      throw FormatError("checkpoint: tensor shapes do not chain with architecture at layer " +
                        std::to_string(l));
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
  }
  return m;
}

std::uint64_t finish_and_write(ByteWriter& w, const std::string& path) {
  std::uint64_t checksum = fnv1a(w.bytes().data(), w.bytes().size());
  w.u64(checksum);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(w.bytes().data()),
            static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw Error("write failed: " + path);
  return checksum;
}

std::vector<unsigned char> read_and_verify(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 4 + 4 + 1 + 8) throw CorruptionError("checkpoint: file too short: " + path);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("checkpoint: bad magic in " + path);
  }
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) {
    stored |= static_cast<std::uint64_t>(bytes[bytes.size() - 8 + static_cast<std::size_t>(i)])
              << (8 * i);
  }
  std::uint64_t actual = fnv1a(bytes.data(), bytes.size() - 8);
  if (stored != actual) throw CorruptionError("checkpoint: checksum mismatch in " + path);
  return bytes;
}

ByteReader payload_reader(const std::vector<unsigned char>& bytes, CheckpointKind* kind) {
  ByteReader r(bytes.data(), bytes.size() - 8);  // checksum already verified
  r.u32();                                       // magic, verified
  std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint: format version " + std::to_string(version) + ", expected " +
                       std::to_string(kCheckpointVersion));
  }
  std::uint8_t k = r.u8();
  if (k > 1) throw FormatError("checkpoint: unknown kind byte " + std::to_string(k));
  *kind = static_cast<CheckpointKind>(k);
  return r;
}

}  // namespace

std::uint64_t save_checkpoint(const ModelParams& model, const std::string& path) {
  ByteWriter w;
  w.raw(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u8(static_cast<std::uint8_t>(CheckpointKind::kMlp));
  write_mlp_payload(w, model);
  return finish_and_write(w, path);
}

std::uint64_t save_checkpoint(const CompositeModel& comp, const std::string& path) {
  ByteWriter w;
  w.raw(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u8(static_cast<std::uint8_t>(CheckpointKind::kComposite));
  w.f64(comp.head_train_eps);
  w.u64(comp.head_seed);
  write_mlp_payload(w, comp.robust_backbone);
  write_mlp_payload(w, comp.natural_backbone);
  write_tensor(w, comp.head_weight);
  write_tensor(w, comp.head_bias);
  return finish_and_write(w, path);
}

CheckpointKind peek_checkpoint_kind(const std::string& path) {
  std::vector<unsigned char> bytes = read_and_verify(path);
  CheckpointKind kind;
  payload_reader(bytes, &kind);
  return kind;
}

ModelParams load_model_checkpoint(const std::string& path) {
  std::vector<unsigned char> bytes = read_and_verify(path);
  CheckpointKind kind;
  ByteReader r = payload_reader(bytes, &kind);
  if (kind != CheckpointKind::kMlp) {
    throw FormatError("checkpoint: expected an mlp checkpoint: " + path);
  }
  ModelParams m = read_mlp_payload(r);
  if (r.remaining() != 0) throw CorruptionError("checkpoint: trailing bytes in " + path);
  return m;
}

CompositeModel load_composite_checkpoint(const std::string& path) {
  std::vector<unsigned char> bytes = read_and_verify(path);
  CheckpointKind kind;
  ByteReader r = payload_reader(bytes, &kind);
  if (kind != CheckpointKind::kComposite) {
    throw FormatError("checkpoint: expected a composite checkpoint: " + path);
  }
  CompositeModel comp;
  comp.head_train_eps = r.f64();
  comp.head_seed = r.u64();
  comp.robust_backbone = read_mlp_payload(r);
  comp.natural_backbone = read_mlp_payload(r);
  comp.head_weight = read_tensor(r);
  comp.head_bias = read_tensor(r);
  if (r.remaining() != 0) throw CorruptionError("checkpoint: trailing bytes in " + path);
  if (comp.head_weight.shape != std::vector<std::size_t>{comp.num_classes(), comp.fused_dim()} ||
      comp.head_bias.shape != std::vector<std::size_t>{comp.num_classes()}) {
    throw FormatError("checkpoint: composite head shapes do not chain with backbones");
  }
  return comp;
}

}  // namespace robustkit
