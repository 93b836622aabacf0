#pragma once

#include "ddlab/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace ddlab {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Images as rows of `images`, pixels scaled to [0, 1].
struct ImageSet {
  Matrix images;
  std::vector<int> labels;
  Index rows = 0;
  Index cols = 0;

  Index size() const { return images.rows(); }
};

/// Reads an MNIST-style pair of big-endian IDX files (uncompressed).
ImageSet load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

void write_idx_images(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

/// Deterministic random subset of `size` examples, kept in original order.
/// Taking the full size returns the set unchanged.
ImageSet subset_dataset(const ImageSet& full, Index size, std::uint64_t seed);

/// Indices selected by subset_dataset.
std::vector<Index> subset_indices(Index full_size, Index size, std::uint64_t seed);

}  // namespace ddlab
