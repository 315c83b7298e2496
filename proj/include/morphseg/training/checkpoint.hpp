#pragma once

// Binary checkpoint layout (all integers little-endian):
//
//   "MSEGCKPT"                         8-byte magic
//   u32 version                        kCheckpointVersion
//   u32 n, n bytes                     metadata, "key=value\n" lines
//   u32 count, count x (u32 n, bytes)  vocabulary symbols in index order
//   u32 count, count x array:          named parameter arrays
//       u32 n, name bytes
//       u32 rank, rank x u64 dims
//       product(dims) x f64            row-major IEEE-754 doubles
//   u32 crc32                          over every preceding byte

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "morphseg/data/corpus.hpp"
#include "morphseg/data/vocabulary.hpp"
#include "morphseg/model/params.hpp"

namespace morphseg::training {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
/// The file was written by an incompatible format version.
class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
/// Truncated, corrupted, or not a checkpoint at all.
class CheckpointIntegrityError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

struct CheckpointMeta {
  data::TrainingMode mode = data::TrainingMode::S2S;
  std::size_t m = 1;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  double dev_accuracy = 0.0;
  /// Set for single-language models trained on tagged data.
  std::optional<data::Language> language;

  bool operator==(const CheckpointMeta&) const = default;
};

struct Checkpoint {
  data::Vocabulary vocab;
  model::ModelParams params;
  CheckpointMeta meta;

  bool operator==(const Checkpoint&) const = default;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

/// Writes to a temporary file in the same directory, then renames it.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace morphseg::training
