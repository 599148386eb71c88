#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "dfx/nn/tensor.hpp"

// IDX files as distributed for MNIST and Fashion-MNIST.
namespace dfx::harness {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;

/// Images [N, 1, rows, cols] scaled from bytes to [0, 1].
nn::Tensor load_idx_images(const std::filesystem::path& path);
/// Labels, each checked to lie in [0, classes).
std::vector<int> load_idx_labels(const std::filesystem::path& path, std::size_t classes);

/// Writes images [N, 1, H, W] in [0, 1], rounding to the nearest byte.
void write_idx_images(const std::filesystem::path& path, const nn::Tensor& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<int>& labels);

/// Victim-side data. Extraction code never receives the training split.
struct DatasetStore {
  nn::Tensor train_images;
  std::vector<int> train_labels;
  nn::Tensor test_images;
  std::vector<int> test_labels;

  /// Reads the four standard MNIST-style files from `dir`.
  static DatasetStore load(const std::filesystem::path& dir, std::size_t classes = 10);
  static nn::Tensor load_test_images(const std::filesystem::path& dir);
  static std::vector<int> load_test_labels(const std::filesystem::path& dir, std::size_t classes = 10);
};

inline constexpr const char* kTrainImagesFile = "train-images-idx3-ubyte";
inline constexpr const char* kTrainLabelsFile = "train-labels-idx1-ubyte";
inline constexpr const char* kTestImagesFile = "t10k-images-idx3-ubyte";
inline constexpr const char* kTestLabelsFile = "t10k-labels-idx1-ubyte";

}  // namespace dfx::harness
