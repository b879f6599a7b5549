#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "ffa/data/dataset.hpp"

namespace ffa::data {

// Delimited text, one sample per line, label in the last column. A first
// line whose numeric columns do not parse is taken as a header; blank lines
// and lines starting with '#' are skipped. Symbolic columns are label-encoded
// (codes in order of first appearance). Labels map through the schema's
// class names when it has them, otherwise they must be non-negative integers.
// Features are returned raw; scale them with scale_minmax.
Dataset load_tabular(const std::filesystem::path& path, const FeatureSchema& schema,
                     char delimiter = ',');

struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major
};

// Big-endian IDX readers; magic 0x00000803 for images, 0x00000801 for labels.
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

// Pixels divided by 255, every pixel mutable. Without a label file every
// label is 0. `limit` keeps only the first samples.
Dataset load_idx_images(const std::filesystem::path& images,
                        const std::optional<std::filesystem::path>& labels = std::nullopt,
                        std::optional<std::size_t> limit = std::nullopt);

}  // namespace ffa::data
