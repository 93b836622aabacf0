#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddlab/error.hpp"
#include "ddlab/idx.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace ddlab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ddlab_idx_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("two-image fixture round trip") {
  TempDir dir;
  // Hand-written big-endian bytes: 2 images of 2x3, labels 7 and 0.
  write_bytes(dir.path / "img", {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 3,
                                 0, 51, 102, 153, 204, 255,
                                 255, 0, 255, 0, 255, 0});
  write_bytes(dir.path / "lab", {0, 0, 8, 1, 0, 0, 0, 2, 7, 0});
  const ImageSet set = load_idx(dir.path / "img", dir.path / "lab");
  CHECK(set.size() == 2);
  CHECK(set.rows == 2);
  CHECK(set.cols == 3);
  CHECK(set.labels == std::vector<int>{7, 0});
  CHECK(set.images(0, 1) == doctest::Approx(0.2));
  CHECK(set.images(0, 5) == 1.0);
  CHECK(set.images(1, 1) == 0.0);

  write_idx_images(dir.path / "img2", {0, 51, 102, 153, 204, 255, 255, 0, 255, 0, 255, 0}, 2, 2, 3);
  write_idx_labels(dir.path / "lab2", {7, 0});
  const ImageSet again = load_idx(dir.path / "img2", dir.path / "lab2");
  CHECK(again.images == set.images);
  CHECK(again.labels == set.labels);
}

TEST_CASE("format errors") {
  TempDir dir;
  write_idx_images(dir.path / "img", std::vector<std::uint8_t>(8, 1), 2, 2, 2);
  write_idx_labels(dir.path / "lab", {1, 2});

  SUBCASE("labels file with the image magic") {
    CHECK_THROWS_WITH_AS(load_idx(dir.path / "img", dir.path / "img"), doctest::Contains("wrong magic for labels"),
                         FormatError);
  }
  SUBCASE("images file with the label magic") {
    CHECK_THROWS_WITH_AS(load_idx(dir.path / "lab", dir.path / "lab"), doctest::Contains("wrong magic for images"),
                         FormatError);
  }
  SUBCASE("count mismatch") {
    write_idx_labels(dir.path / "lab3", {1, 2, 3});
    CHECK_THROWS_WITH_AS(load_idx(dir.path / "img", dir.path / "lab3"), doctest::Contains("count mismatch"),
                         FormatError);
  }
  SUBCASE("truncated") {
    write_bytes(dir.path / "short", {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 1, 2, 3});
    CHECK_THROWS_WITH_AS(load_idx(dir.path / "short", dir.path / "lab"), doctest::Contains("truncated"),
                         FormatError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS(load_idx(dir.path / "nope", dir.path / "lab"));
  }
}

TEST_CASE("subsets") {
  const auto all = subset_indices(50, 50, 3);
  for (Index i = 0; i < 50; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);

  const auto a = subset_indices(1000, 20, 17);
  CHECK(a == subset_indices(1000, 20, 17));
  CHECK(a != subset_indices(1000, 20, 18));
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK_THROWS_AS(subset_indices(10, 11, 1), InvalidArgument);

  ImageSet full;
  full.rows = 1;
  full.cols = 2;
  full.images = Matrix(4, 2);
  full.images << 0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7;
  full.labels = {0, 1, 2, 3};
  const ImageSet same = subset_dataset(full, 4, 99);
  CHECK(same.images == full.images);
  CHECK(same.labels == full.labels);
  const ImageSet two = subset_dataset(full, 2, 99);
  CHECK(two.size() == 2);
  for (Index i = 0; i < 2; ++i)
    CHECK(two.images(i, 0) == doctest::Approx(0.2 * two.labels[static_cast<std::size_t>(i)]));
}
