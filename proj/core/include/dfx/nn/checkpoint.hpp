#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dfx/nn/tensor.hpp"

namespace dfx::nn {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kCheckpointMagic[4] = {'D', 'F', 'X', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout, all integers little-endian:
//   magic "DFXC" | u32 version | u32 tensor count |
//   per tensor: u32 name length, UTF-8 name, u32 rank, u32 extents[rank], f64 values[]
void write_checkpoint(std::ostream& out, const NamedTensors& tensors);
NamedTensors read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const NamedTensors& tensors);
NamedTensors load_checkpoint(const std::filesystem::path& path);

/// Copies values from `source` into the same-named tensors of `dest`,
/// which must match one to one in names and shapes.
void assign_by_name(const NamedTensors& dest, const NamedTensors& source);

/// FNV-1a over names, shapes and value bytes.
std::uint64_t checksum(const NamedTensors& tensors);

}  // namespace dfx::nn
