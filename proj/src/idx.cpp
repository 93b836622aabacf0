#include "ddlab/idx.hpp"

#include "ddlab/error.hpp"
#include "ddlab/rng.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

namespace ddlab {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open IDX file " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset, const std::filesystem::path& path) {
  if (bytes.size() < offset + 4) throw FormatError("truncated IDX header in " + path.string());
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

std::string hex(std::uint32_t v) {
  std::ostringstream s;
  s << "0x" << std::hex << v;
  return s.str();
}

}  // namespace

ImageSet load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const std::vector<std::uint8_t> img = read_file(images_path);
  const std::vector<std::uint8_t> lab = read_file(labels_path);

  const std::uint32_t img_magic = read_be32(img, 0, images_path);
  if (img_magic != kIdxImageMagic) {
    throw FormatError("wrong magic for images: " + hex(img_magic) + " in " + images_path.string());
  }
  const std::uint32_t lab_magic = read_be32(lab, 0, labels_path);
  if (lab_magic != kIdxLabelMagic) {
    throw FormatError("wrong magic for labels: " + hex(lab_magic) + " in " + labels_path.string());
  }
  const std::uint32_t count = read_be32(img, 4, images_path);
  const std::uint32_t rows = read_be32(img, 8, images_path);
  const std::uint32_t cols = read_be32(img, 12, images_path);
  const std::uint32_t label_count = read_be32(lab, 4, labels_path);
  if (count != label_count) {
    throw FormatError("count mismatch: " + std::to_string(count) + " images vs " + std::to_string(label_count) +
                      " labels");
  }
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  if (img.size() < 16 + pixels * count) throw FormatError("truncated image data in " + images_path.string());
  if (lab.size() < 8 + std::size_t{count}) throw FormatError("truncated label data in " + labels_path.string());

  ImageSet set;
  set.rows = rows;
  set.cols = cols;
  set.images.resize(count, static_cast<Index>(pixels));
  set.labels.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint8_t* p = img.data() + 16 + static_cast<std::size_t>(i) * pixels;
    for (std::size_t j = 0; j < pixels; ++j) set.images(i, static_cast<Index>(j)) = p[j] / 255.0;
    set.labels[i] = lab[8 + i];
    if (set.labels[i] > 9) throw FormatError("label out of range [0, 9] in " + labels_path.string());
  }
  return set;
}

void write_idx_images(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols) {
  if (pixels.size() != static_cast<std::size_t>(count) * rows * cols) {
    throw InvalidArgument("write_idx_images: pixel count does not match shape");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  put_be32(out, kIdxImageMagic);
  put_be32(out, count);
  put_be32(out, rows);
  put_be32(out, cols);
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  put_be32(out, kIdxLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

std::vector<Index> subset_indices(Index full_size, Index size, std::uint64_t seed) {
  if (size < 0 || size > full_size) {
    throw InvalidArgument("subset_dataset: size " + std::to_string(size) + " exceeds dataset size " +
                          std::to_string(full_size));
  }
  std::vector<Index> idx(static_cast<std::size_t>(full_size));
  std::iota(idx.begin(), idx.end(), Index{0});
  Rng rng = make_rng(seed, {hash_string("subset")});
  // Partial Fisher-Yates: the first `size` slots hold the sample.
  for (Index i = 0; i < size; ++i) {
    std::uniform_int_distribution<Index> pick(i, full_size - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(size));
  std::sort(idx.begin(), idx.end());
  return idx;
}

ImageSet subset_dataset(const ImageSet& full, Index size, std::uint64_t seed) {
  const std::vector<Index> idx = subset_indices(full.size(), size, seed);
  ImageSet out;
  out.rows = full.rows;
  out.cols = full.cols;
  out.images.resize(size, full.images.cols());
  out.labels.resize(static_cast<std::size_t>(size));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.images.row(static_cast<Index>(i)) = full.images.row(idx[i]);
    out.labels[i] = full.labels[static_cast<std::size_t>(idx[i])];
  }
  return out;
}

}  // namespace ddlab
