#include "congfu/checkpoint.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "congfu/errors.h"

namespace congfu {
namespace {

template <typename T>
void to_little_endian(std::vector<char>& bytes) {
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i + sizeof(T) <= bytes.size(); i += sizeof(T))
      std::reverse(bytes.begin() + i, bytes.begin() + i + sizeof(T));
  }
}

std::filesystem::path blob_path(const std::filesystem::path& path, const nlohmann::json& manifest) {
  return path.parent_path() / manifest.at("blob").get<std::string>();
}

}  // namespace

template <typename T>
const CheckpointEntry<T>* Checkpoint<T>::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

template <>
const char* dtype_name<float>() {
  return "float32";
}
template <>
const char* dtype_name<double>() {
  return "float64";
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<T>& ckpt) {
  const auto blob_name = path.filename().string() + ".bin";
  nlohmann::json manifest;
  manifest["format"] = kCheckpointFormat;
  manifest["dtype"] = dtype_name<T>();
  manifest["byte_order"] = "little";
  manifest["blob"] = blob_name;
  manifest["tensors"] = nlohmann::json::array();
  std::vector<char> blob;
  for (const auto& e : ckpt.entries) {
    if (numel(e.shape) != e.data.size()) {
      throw DimensionError("checkpoint entry " + e.name + " has shape " + shape_str(e.shape) + " but " +
                           std::to_string(e.data.size()) + " values");
    }
    const std::size_t nbytes = e.data.size() * sizeof(T);
    manifest["tensors"].push_back({{"name", e.name}, {"shape", e.shape}, {"offset", blob.size()}, {"nbytes", nbytes}});
    const auto start = blob.size();
    blob.resize(start + nbytes);
    if (nbytes) std::memcpy(blob.data() + start, e.data.data(), nbytes);
  }
  to_little_endian<T>(blob);
  manifest["metadata"] = ckpt.metadata;

  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream mf(path, std::ios::binary);
  if (!mf) throw IoError("cannot write checkpoint manifest " + path.string());
  mf << manifest.dump(2) << '\n';
  std::ofstream bf(path.parent_path() / blob_name, std::ios::binary);
  if (!bf) throw IoError("cannot write checkpoint blob for " + path.string());
  bf.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

nlohmann::json read_checkpoint_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("checkpoint manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!manifest.contains("format") || manifest["format"] != kCheckpointFormat) {
    throw SchemaError("checkpoint " + path.string() + " is not in format " + kCheckpointFormat);
  }
  return manifest;
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path) {
  const auto manifest = read_checkpoint_manifest(path);
  if (manifest.at("dtype") != dtype_name<T>()) {
    throw SchemaError("checkpoint " + path.string() + " holds " + manifest.at("dtype").get<std::string>() +
                      " tensors, expected " + dtype_name<T>());
  }
  std::ifstream bf(blob_path(path, manifest), std::ios::binary);
  if (!bf) throw IoError("cannot open checkpoint blob for " + path.string());
  std::vector<char> blob((std::istreambuf_iterator<char>(bf)), std::istreambuf_iterator<char>());
  to_little_endian<T>(blob);

  Checkpoint<T> ckpt;
  ckpt.metadata = manifest.value("metadata", nlohmann::json::object());
  for (const auto& t : manifest.at("tensors")) {
    CheckpointEntry<T> e;
    e.name = t.at("name").get<std::string>();
    e.shape = t.at("shape").get<Shape>();
    const auto offset = t.at("offset").get<std::size_t>();
    const auto nbytes = t.at("nbytes").get<std::size_t>();
    if (nbytes != numel(e.shape) * sizeof(T) || offset + nbytes > blob.size()) {
      throw SchemaError("checkpoint tensor " + e.name + " has an inconsistent byte range");
    }
    e.data.resize(numel(e.shape));
    if (nbytes) std::memcpy(e.data.data(), blob.data() + offset, nbytes);
    ckpt.entries.push_back(std::move(e));
  }
  return ckpt;
}

template struct Checkpoint<float>;
template struct Checkpoint<double>;
template void save_checkpoint<float>(const std::filesystem::path&, const Checkpoint<float>&);
template void save_checkpoint<double>(const std::filesystem::path&, const Checkpoint<double>&);
template Checkpoint<float> load_checkpoint<float>(const std::filesystem::path&);
template Checkpoint<double> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace congfu
