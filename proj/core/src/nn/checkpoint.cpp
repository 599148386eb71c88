#include "dfx/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace dfx::nn {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  out.write(b, 4);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
  out.write(b, 8);
}

void get_bytes(std::istream& in, char* dst, std::size_t n, const char* what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw CheckpointError(std::string("checkpoint truncated while reading ") + what);
  }
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  get_bytes(in, reinterpret_cast<char*>(b), 4, what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const NamedTensors& tensors) {
  out.write(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t extent : t.shape()) put_u32(out, static_cast<std::uint32_t>(extent));
    for (double v : t.values()) put_f64(out, v);
  }
  if (!out) throw CheckpointError("failed writing checkpoint stream");
}

NamedTensors read_checkpoint(std::istream& in) {
  char magic[4];
  get_bytes(in, magic, 4, "magic");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw CheckpointError("bad checkpoint magic");
  const std::uint32_t version = get_u32(in, "version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = get_u32(in, "tensor count");
  NamedTensors tensors;
  tensors.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name(get_u32(in, "name length"), '\0');
    get_bytes(in, name.data(), name.size(), "name");
    const std::uint32_t rank = get_u32(in, "rank");
    if (rank > 8) throw CheckpointError("implausible rank for tensor '" + name + "'");
    Shape shape(rank);
    for (auto& extent : shape) extent = get_u32(in, "extent");
    std::vector<double> values(numel(shape));
    for (double& v : values) {
      unsigned char b[8];
      get_bytes(in, reinterpret_cast<char*>(b), 8, "values");
      std::uint64_t bits = 0;
      for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
      v = std::bit_cast<double>(bits);
    }
    try {
      tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
    } catch (const ShapeError& e) {
      throw CheckpointError(std::string("invalid tensor in checkpoint: ") + e.what());
    }
  }
  return tensors;
}

void save_checkpoint(const std::filesystem::path& path, const NamedTensors& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path.string());
  write_checkpoint(out, tensors);
}

NamedTensors load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
  try {
    return read_checkpoint(in);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

void assign_by_name(const NamedTensors& dest, const NamedTensors& source) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : source) by_name[name] = &t;
  if (by_name.size() != dest.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(by_name.size()) + " tensors, model expects " +
                          std::to_string(dest.size()));
  }
  for (const auto& [name, t] : dest) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw CheckpointError("checkpoint is missing tensor '" + name + "'");
    if (it->second->shape() != t.shape()) {
      throw CheckpointError("tensor '" + name + "' has shape " + to_string(it->second->shape()) +
                            ", model expects " + to_string(t.shape()));
    }
    Tensor target = t;
    std::copy(it->second->values().begin(), it->second->values().end(), target.values().begin());
  }
}

std::uint64_t checksum(const NamedTensors& tensors) {
  std::uint64_t h = kFnvOffset;
  for (const auto& [name, t] : tensors) {
    fnv(h, name.data(), name.size());
    for (std::size_t extent : t.shape()) {
      const auto e = static_cast<std::uint64_t>(extent);
      fnv(h, &e, sizeof e);
    }
    fnv(h, t.values().data(), t.size() * sizeof(double));
  }
  return h;
}

}  // namespace dfx::nn
