#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "relight/nn/module.hpp"

namespace relight::nn {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointTensor {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

/// JSON header (format version, caller metadata, tensor table) followed by
/// a raw little-endian float32 payload.
struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<CheckpointTensor> tensors;

  const CheckpointTensor* find(const std::string& name) const;
  const CheckpointTensor& at(const std::string& name) const;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

template <typename T>
void append_params(Checkpoint& c, const std::string& prefix, const std::vector<NamedParam<T>>& ps);

/// Copies stored values into `ps`; throws ValidationError on a missing name
/// or shape mismatch.
template <typename T>
void load_params(const Checkpoint& c, const std::string& prefix, std::vector<NamedParam<T>>& ps);

}  // namespace relight::nn
