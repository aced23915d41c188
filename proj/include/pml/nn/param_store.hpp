#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pml/nn/layers.hpp"

namespace pml::nn {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Flat list of named tensors: trainable parameters followed by buffers.
struct ParamStore {
  std::vector<NamedTensor> tensors;

  const Tensor& get(const std::string& name) const;
  bool all_finite() const;
  // FNV-1a over names, shapes and float64 bit patterns.
  std::uint64_t checksum() const;
};

ParamStore snapshot(const std::vector<Parameter*>& params,
                    const std::vector<Buffer*>& buffers);

// Copies values by name; throws std::invalid_argument on a missing name or a
// shape mismatch.
void restore(const ParamStore& store, const std::vector<Parameter*>& params,
             const std::vector<Buffer*>& buffers);

// Network kind tags stored in the file header.
enum class NetKind : std::uint32_t { forward_unet = 1, bc_regressor = 2 };

struct ParamFile {
  NetKind kind = NetKind::forward_unet;
  std::vector<std::int32_t> descriptor;  // architecture fields, kind-specific
  ParamStore store;
};

// "PMLW" | u32 version | u32 kind | u32 n | n x i32 descriptor |
// u32 tensor count | per tensor: u32 name length, name, u32 rank,
// rank x u32 dims, float32 LE values.
inline constexpr std::uint32_t kParamFileVersion = 1;

std::vector<std::uint8_t> encode_param_file(const ParamFile& file);
ParamFile decode_param_file(const std::vector<std::uint8_t>& bytes);

void save_param_file(const std::string& path, const ParamFile& file);
ParamFile load_param_file(const std::string& path);

}  // namespace pml::nn
