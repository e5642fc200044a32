#include "augcl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "augcl/errors.hpp"

namespace augcl {

namespace {

constexpr char kMagic[8] = {'A', 'U', 'G', 'C', 'L', 'C', 'K', 'P'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class Writer {
 public:
  template <typename T>
  void put(T v) {
    v = to_little(v);
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out_.append(b, sizeof(T));
  }
  void put_f64(double d) { put(std::bit_cast<std::uint64_t>(d)); }
  void bytes(const std::string& s) { out_.append(s); }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(v);
  }
  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  void need(std::size_t n) const {
    if (n > in_.size() - pos_) throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_));
  }

 private:
  const std::string& in_;
  std::size_t pos_ = 0;
};

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

void Checkpoint::put_tensor(const std::string& name, const Tensor& t) {
  records_[name] = TensorRecord{t.shape(), {t.data().begin(), t.data().end()}};
}

void Checkpoint::put_tensor(const std::string& name, Shape shape, std::vector<double> values) {
  if (shape_numel(shape) != values.size()) throw InvalidShape("put_tensor: shape/data mismatch for " + name);
  records_[name] = TensorRecord{std::move(shape), std::move(values)};
}

void Checkpoint::put_u64(const std::string& name, std::vector<std::uint64_t> values) {
  records_[name] = std::move(values);
}

void Checkpoint::put_text(const std::string& name, std::string text) { records_[name] = std::move(text); }

namespace {
template <typename T>
const T& typed(const std::map<std::string, Checkpoint::Record>& records, const std::string& name, const char* kind) {
  auto it = records.find(name);
  if (it == records.end()) throw CheckpointError("checkpoint missing record '" + name + "'");
  const T* v = std::get_if<T>(&it->second);
  if (!v) throw CheckpointError("checkpoint record '" + name + "' is not " + kind);
  return *v;
}
}  // namespace

const Checkpoint::TensorRecord& Checkpoint::tensor(const std::string& name) const {
  return typed<TensorRecord>(records_, name, "a tensor");
}
const std::vector<std::uint64_t>& Checkpoint::u64(const std::string& name) const {
  return typed<std::vector<std::uint64_t>>(records_, name, "a u64 array");
}
const std::string& Checkpoint::text(const std::string& name) const {
  return typed<std::string>(records_, name, "text");
}

std::string Checkpoint::serialize() const {
  Writer w;
  w.bytes(std::string(kMagic, sizeof(kMagic)));
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint64_t>(records_.size());
  for (auto& [name, rec] : records_) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(rec.index()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    if (auto* t = std::get_if<TensorRecord>(&rec)) {
      w.put<std::uint32_t>(static_cast<std::uint32_t>(t->shape.size()));
      for (auto d : t->shape) w.put<std::uint64_t>(d);
      for (double v : t->values) w.put_f64(v);
    } else if (auto* u = std::get_if<std::vector<std::uint64_t>>(&rec)) {
      w.put<std::uint64_t>(u->size());
      for (auto v : *u) w.put<std::uint64_t>(v);
    } else {
      const auto& s = std::get<std::string>(rec);
      w.put<std::uint64_t>(s.size());
      w.bytes(s);
    }
  }
  w.put<std::uint64_t>(fnv1a(w.str().data(), w.str().size()));
  return std::move(w.str());
}

Checkpoint Checkpoint::deserialize(const std::string& bytes) {
  Reader r(bytes);
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("not a checkpoint file (bad magic)");
  r.bytes(sizeof(kMagic));
  auto version = r.get<std::uint32_t>();
  if (version != kVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kVersion) + ")");
  if (bytes.size() < 8 + 8) throw CheckpointError("checkpoint truncated");
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 8, 8);
  if (to_little(stored) != fnv1a(bytes.data(), bytes.size() - 8)) throw CheckpointError("checkpoint checksum mismatch");

  Checkpoint ckpt;
  auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    auto kind = r.get<std::uint8_t>();
    auto name_len = r.get<std::uint32_t>();
    std::string name = r.bytes(name_len);
    if (kind == 0) {
      auto rank = r.get<std::uint32_t>();
      Shape shape(rank);
      for (auto& d : shape) d = r.get<std::uint64_t>();
      std::size_t n = shape_numel(shape);
      r.need(n * 8);
      std::vector<double> values(n);
      for (auto& v : values) v = r.get_f64();
      ckpt.records_[name] = TensorRecord{std::move(shape), std::move(values)};
    } else if (kind == 1) {
      auto n = r.get<std::uint64_t>();
      r.need(n * 8);
      std::vector<std::uint64_t> values(n);
      for (auto& v : values) v = r.get<std::uint64_t>();
      ckpt.records_[name] = std::move(values);
    } else if (kind == 2) {
      auto n = r.get<std::uint64_t>();
      ckpt.records_[name] = r.bytes(n);
    } else {
      throw CheckpointError("unknown record kind " + std::to_string(kind) + " for '" + name + "'");
    }
  }
  if (r.pos() != bytes.size() - 8) throw CheckpointError("trailing bytes in checkpoint");
  return ckpt;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::string bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed for " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

void store_parameters(Checkpoint& ckpt, const ParameterSet& params, const std::string& prefix) {
  for (auto& [name, t] : params) ckpt.put_tensor(prefix + name, t);
}

void restore_parameters(const Checkpoint& ckpt, ParameterSet& params, const std::string& prefix) {
  // Validate everything before touching any value.
  for (auto& [name, t] : params) {
    const auto& rec = ckpt.tensor(prefix + name);
    if (rec.shape != t.shape())
      throw CheckpointError("shape mismatch for '" + prefix + name + "': checkpoint " + shape_str(rec.shape) +
                            ", model " + shape_str(t.shape()));
  }
  for (auto& [name, t] : params) {
    const auto& rec = ckpt.tensor(prefix + name);
    std::copy(rec.values.begin(), rec.values.end(), t.mutable_data().begin());
  }
}

void save_parameters(const ParameterSet& params, const std::filesystem::path& path) {
  Checkpoint ckpt;
  store_parameters(ckpt, params);
  ckpt.save(path);
}

void load_parameters(ParameterSet& params, const std::filesystem::path& path) {
  restore_parameters(Checkpoint::load(path), params);
}

}  // namespace augcl
