#include "dfx/harness/idx.hpp"

#include <cmath>
#include <fstream>

namespace dfx::harness {

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& bytes, std::size_t offset, const std::filesystem::path& path) {
  if (bytes.size() < offset + 4) throw DatasetError(path.string() + ": truncated IDX header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

}  // namespace

nn::Tensor load_idx_images(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const std::uint32_t magic = be32(bytes, 0, path);
  if (magic != kIdxImageMagic) throw DatasetError(path.string() + ": bad IDX image magic");
  const std::size_t count = be32(bytes, 4, path), rows = be32(bytes, 8, path), cols = be32(bytes, 12, path);
  if (count == 0 || rows == 0 || cols == 0) throw DatasetError(path.string() + ": empty IDX dimensions");
  const std::size_t expected = 16 + count * rows * cols;
  if (bytes.size() < expected) {
    throw DatasetError(path.string() + ": truncated, expected " + std::to_string(expected) + " bytes, found " +
                       std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) throw DatasetError(path.string() + ": trailing bytes after IDX payload");
  nn::Tensor images({count, 1, rows, cols});
  for (std::size_t i = 0; i < images.size(); ++i) images[i] = bytes[16 + i] / 255.0;
  return images;
}

std::vector<int> load_idx_labels(const std::filesystem::path& path, std::size_t classes) {
  const auto bytes = read_file(path);
  if (be32(bytes, 0, path) != kIdxLabelMagic) throw DatasetError(path.string() + ": bad IDX label magic");
  const std::size_t count = be32(bytes, 4, path);
  if (bytes.size() != 8 + count) {
    throw DatasetError(path.string() + ": expected " + std::to_string(8 + count) + " bytes, found " +
                       std::to_string(bytes.size()));
  }
  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) {
    labels[i] = bytes[8 + i];
    if (static_cast<std::size_t>(labels[i]) >= classes) {
      throw DatasetError(path.string() + ": label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                         " is outside [0, " + std::to_string(classes) + ")");
    }
  }
  return labels;
}

void write_idx_images(const std::filesystem::path& path, const nn::Tensor& images) {
  if (images.rank() != 4 || images.dim(1) != 1) {
    throw DatasetError("IDX images must be [N, 1, H, W], got " + nn::to_string(images.shape()));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot open " + path.string() + " for writing");
  put_be32(out, kIdxImageMagic);
  put_be32(out, static_cast<std::uint32_t>(images.dim(0)));
  put_be32(out, static_cast<std::uint32_t>(images.dim(2)));
  put_be32(out, static_cast<std::uint32_t>(images.dim(3)));
  for (double v : images.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw DatasetError("IDX image values must lie in [0, 1]");
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  if (!out) throw DatasetError("failed writing " + path.string());
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot open " + path.string() + " for writing");
  put_be32(out, kIdxLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) {
    if (l < 0 || l > 255) throw DatasetError("IDX labels must fit in a byte");
    out.put(static_cast<char>(l));
  }
  if (!out) throw DatasetError("failed writing " + path.string());
}

DatasetStore DatasetStore::load(const std::filesystem::path& dir, std::size_t classes) {
  DatasetStore store;
  store.train_images = load_idx_images(dir / kTrainImagesFile);
  store.train_labels = load_idx_labels(dir / kTrainLabelsFile, classes);
  store.test_images = load_test_images(dir);
  store.test_labels = load_test_labels(dir, classes);
  if (store.train_images.dim(0) != store.train_labels.size()) {
    throw DatasetError((dir / kTrainImagesFile).string() + ": image count does not match " + kTrainLabelsFile);
  }
  if (store.test_images.dim(0) != store.test_labels.size()) {
    throw DatasetError((dir / kTestImagesFile).string() + ": image count does not match " + kTestLabelsFile);
  }
  return store;
}

nn::Tensor DatasetStore::load_test_images(const std::filesystem::path& dir) {
  return load_idx_images(dir / kTestImagesFile);
}

std::vector<int> DatasetStore::load_test_labels(const std::filesystem::path& dir, std::size_t classes) {
  return load_idx_labels(dir / kTestLabelsFile, classes);
}

}  // namespace dfx::harness
