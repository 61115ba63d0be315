#pragma once

// Checkpoint layout: `<path>` is a UTF-8 JSON manifest and `<path>.bin` the
// blob of little-endian floats it indexes.
//
//   {"format": "congfu-ckpt/1", "dtype": "float32", "blob": "best.ckpt.bin",
//    "tensors": [{"name": ..., "shape": [...], "offset": bytes, "nbytes": bytes}, ...],
//    "metadata": {...}}

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "congfu/tensor.h"

namespace congfu {

inline constexpr const char* kCheckpointFormat = "congfu-ckpt/1";

template <typename T>
struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::vector<T> data;
};

template <typename T>
struct Checkpoint {
  std::vector<CheckpointEntry<T>> entries;
  nlohmann::json metadata = nlohmann::json::object();

  const CheckpointEntry<T>* find(const std::string& name) const;
};

template <typename T>
const char* dtype_name();

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& ckpt);

/// Throws SchemaError on a wrong format tag or a dtype that differs from T.
template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path);

/// Reads only the manifest (dtype, metadata) without touching the blob.
nlohmann::json read_checkpoint_manifest(const std::filesystem::path& path);

}  // namespace congfu
