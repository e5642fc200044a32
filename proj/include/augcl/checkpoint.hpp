#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "augcl/params.hpp"

namespace augcl {

/// Single-file container of named records.
///
/// Layout (all integers and floats little-endian):
///   magic "AUGCLCKP" | u32 version | u64 record count |
///   records... | u64 FNV-1a checksum of every preceding byte.
/// A record is u8 kind | u32 name length | name | payload, where the payload is
///   kind 0 (float64 tensor): u32 rank | u64 dims[rank] | f64 values
///   kind 1 (u64 array):      u64 length | u64 values
///   kind 2 (text):           u64 length | bytes
class Checkpoint {
 public:
  static constexpr std::uint32_t kVersion = 1;

  struct TensorRecord {
    Shape shape;
    std::vector<double> values;
  };
  using Record = std::variant<TensorRecord, std::vector<std::uint64_t>, std::string>;

  void put_tensor(const std::string& name, const Tensor& t);
  void put_tensor(const std::string& name, Shape shape, std::vector<double> values);
  void put_u64(const std::string& name, std::vector<std::uint64_t> values);
  void put_text(const std::string& name, std::string text);

  bool has(const std::string& name) const { return records_.count(name) > 0; }
  const TensorRecord& tensor(const std::string& name) const;
  const std::vector<std::uint64_t>& u64(const std::string& name) const;
  const std::string& text(const std::string& name) const;
  const std::map<std::string, Record>& records() const { return records_; }

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& bytes);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  std::map<std::string, Record> records_;
};

/// Writes every parameter as a tensor record under `prefix + name`.
void store_parameters(Checkpoint& ckpt, const ParameterSet& params, const std::string& prefix = "");
/// Overwrites parameter values in place; every parameter must be present with
/// an identical shape, otherwise CheckpointError and nothing is modified.
void restore_parameters(const Checkpoint& ckpt, ParameterSet& params, const std::string& prefix = "");

void save_parameters(const ParameterSet& params, const std::filesystem::path& path);
void load_parameters(ParameterSet& params, const std::filesystem::path& path);

}  // namespace augcl
