#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace fedmon {

// Labeled classification data; features stored row-major (size() x dim).
struct Dataset {
  std::size_t dim = 0;
  std::size_t class_count = 0;
  std::vector<double> features;
  std::vector<std::uint32_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }

  // Throws PreconditionError when shapes or labels are inconsistent.
  void validate() const;

  // Copy of the given rows, in order.
  Dataset subset(std::span<const std::size_t> rows) const;
};

using SharedDataset = std::shared_ptr<const Dataset>;

enum class DistributionMode { full_copy, equal_shards };

/// Isotropic Gaussian blobs. Class centers are drawn uniformly from
/// [0.3, 0.7]^dim using `seed`; each example adds N(0, spread^2) noise per
/// coordinate. Examples are emitted class by class.
Dataset gen_blobs(std::size_t class_count, std::size_t dim, std::size_t per_class,
                  double spread, std::uint64_t seed);

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Pixels are scaled to [0, 1]. Throws FormatError on bad magic, count
/// mismatch or truncation. `limit` caps the number of examples read (0 = all).
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, std::size_t limit = 0);

/// Seeded shuffle, then the first round(n * validation_fraction) rows go to
/// validation and the rest to train.
std::pair<Dataset, Dataset> split_holdout(const Dataset& data, double validation_fraction,
                                          std::uint64_t seed);

/// Splits off exactly `count` shuffled rows: {remaining, taken}.
std::pair<Dataset, Dataset> split_count(const Dataset& data, std::size_t count,
                                        std::uint64_t seed);

std::vector<SharedDataset> distribute(SharedDataset data, std::size_t k, DistributionMode mode,
                                      std::uint64_t seed);

}  // namespace fedmon
