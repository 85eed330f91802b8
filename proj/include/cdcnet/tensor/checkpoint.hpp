#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cdcnet/tensor/tensor.hpp"

namespace cdcnet {

/// Flat binary container for named tensors plus a free-form UTF-8 header.
/// Layout (all integers little-endian) is documented in docs/checkpoint.md.
inline constexpr char kCheckpointMagic[4] = {'C', 'D', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  std::variant<Tensor<float>, Tensor<double>> tensor;

  ElementKind kind() const { return tensor.index() == 0 ? ElementKind::f32 : ElementKind::f64; }
  const Shape& shape() const;
  /// Converts to the requested element type if needed.
  template <class T>
  Tensor<T> as() const;
};

struct Checkpoint {
  std::string header;
  std::vector<CheckpointEntry> entries;

  const CheckpointEntry* find(const std::string& name) const;
  template <class T>
  void put(const std::string& name, const Tensor<T>& t) {
    entries.push_back(CheckpointEntry{name, t});
  }
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck);
/// Throws DataError on malformed input, naming the byte offset.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace cdcnet
