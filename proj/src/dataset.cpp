#include "fedmon/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "fedmon/errors.hpp"
#include "fedmon/rng.hpp"

namespace fedmon {

void Dataset::validate() const {
  if (dim == 0) throw PreconditionError("dataset: dim must be positive");
  if (class_count == 0) throw PreconditionError("dataset: class_count must be positive");
  if (features.size() != labels.size() * dim)
    throw PreconditionError("dataset: feature rows do not match label count");
  for (auto label : labels)
    if (label >= class_count) throw PreconditionError("dataset: label out of class range");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.dim = dim;
  out.class_count = class_count;
  out.features.reserve(rows.size() * dim);
  out.labels.reserve(rows.size());
  for (auto r : rows) {
    if (r >= size()) throw PreconditionError("dataset: subset row out of range");
    auto x = row(r);
    out.features.insert(out.features.end(), x.begin(), x.end());
    out.labels.push_back(labels[r]);
  }
  return out;
}

Dataset gen_blobs(std::size_t class_count, std::size_t dim, std::size_t per_class,
                  double spread, std::uint64_t seed) {
  if (class_count == 0 || dim == 0 || per_class == 0)
    throw PreconditionError("gen_blobs: class_count, dim and per_class must be positive");
  if (!(spread >= 0.0) || !std::isfinite(spread))
    throw PreconditionError("gen_blobs: spread must be finite and non-negative");

  auto center_rng = rng::stream(seed, rng::Purpose::data, 0);
  // Centers share a positive offset, like pixel intensities; a symmetric
  // range lets random ReLU features keep classes apart even under poisoning.
  std::uniform_real_distribution<double> unit(0.3, 0.7);
  std::vector<double> centers(class_count * dim);
  for (auto& c : centers) c = unit(center_rng);

  Dataset out;
  out.dim = dim;
  out.class_count = class_count;
  out.features.reserve(class_count * per_class * dim);
  out.labels.reserve(class_count * per_class);

  auto noise_rng = rng::stream(seed, rng::Purpose::data, 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t c = 0; c < class_count; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t j = 0; j < dim; ++j)
        out.features.push_back(centers[c * dim + j] + spread * noise(noise_rng));
      out.labels.push_back(static_cast<std::uint32_t>(c));
    }
  }
  return out;
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& what) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (in.gcount() != 4) throw FormatError("idx: truncated header in " + what);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

std::ifstream open_binary(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("idx: cannot open " + p.string());
  return in;
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, std::size_t limit) {
  constexpr std::uint32_t kImagesMagic = 0x00000803;
  constexpr std::uint32_t kLabelsMagic = 0x00000801;

  auto images = open_binary(images_path);
  auto labels = open_binary(labels_path);

  const auto image_magic = read_be32(images, images_path.string());
  if (image_magic != kImagesMagic)
    throw FormatError("idx: bad image magic in " + images_path.string());
  const auto label_magic = read_be32(labels, labels_path.string());
  if (label_magic != kLabelsMagic)
    throw FormatError("idx: bad label magic in " + labels_path.string());

  const std::size_t image_count = read_be32(images, images_path.string());
  const std::size_t rows = read_be32(images, images_path.string());
  const std::size_t cols = read_be32(images, images_path.string());
  const std::size_t label_count = read_be32(labels, labels_path.string());
  if (image_count != label_count)
    throw FormatError("idx: image count " + std::to_string(image_count) +
                      " does not match label count " + std::to_string(label_count));
  if (rows == 0 || cols == 0) throw FormatError("idx: zero image dimension");

  const std::size_t n = limit == 0 ? image_count : std::min(limit, image_count);
  Dataset out;
  out.dim = rows * cols;
  out.features.resize(n * out.dim);
  out.labels.resize(n);

  std::vector<unsigned char> pixels(out.dim);
  for (std::size_t i = 0; i < n; ++i) {
    images.read(reinterpret_cast<char*>(pixels.data()),
                static_cast<std::streamsize>(pixels.size()));
    if (static_cast<std::size_t>(images.gcount()) != pixels.size())
      throw FormatError("idx: truncated image payload in " + images_path.string());
    for (std::size_t j = 0; j < out.dim; ++j)
      out.features[i * out.dim + j] = static_cast<double>(pixels[j]) / 255.0;

    char label = 0;
    labels.read(&label, 1);
    if (labels.gcount() != 1)
      throw FormatError("idx: truncated label payload in " + labels_path.string());
    out.labels[i] = static_cast<unsigned char>(label);
  }

  std::uint32_t max_label = 0;
  for (auto l : out.labels) max_label = std::max(max_label, l);
  out.class_count = std::max<std::size_t>(10, max_label + 1);
  return out;
}

std::pair<Dataset, Dataset> split_count(const Dataset& data, std::size_t count,
                                        std::uint64_t seed) {
  if (count == 0 || count >= data.size())
    throw PreconditionError("split: both parts must be non-empty");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto gen = rng::stream(seed, rng::Purpose::split);
  std::shuffle(order.begin(), order.end(), gen);

  std::span<const std::size_t> all(order);
  auto taken = data.subset(all.first(count));
  auto remaining = data.subset(all.subspan(count));
  return {std::move(remaining), std::move(taken)};
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& data, double validation_fraction,
                                          std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw PreconditionError("split_holdout: fraction must lie in (0, 1)");
  const auto count = static_cast<std::size_t>(
      std::llround(validation_fraction * static_cast<double>(data.size())));
  return split_count(data, count, seed);
}

std::vector<SharedDataset> distribute(SharedDataset data, std::size_t k, DistributionMode mode,
                                      std::uint64_t seed) {
  if (!data || data->empty()) throw PreconditionError("distribute: empty dataset");
  if (k == 0) throw PreconditionError("distribute: k must be at least 1");

  if (mode == DistributionMode::full_copy || k == 1)
    return std::vector<SharedDataset>(k, data);

  const std::size_t n = data->size();
  if (n < k) throw PreconditionError("distribute: fewer examples than workers");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto gen = rng::stream(seed, rng::Purpose::split, 1);
  std::shuffle(order.begin(), order.end(), gen);

  // The first n % k shards take one extra example.
  std::vector<SharedDataset> shards;
  shards.reserve(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t offset = 0;
  std::span<const std::size_t> all(order);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    shards.push_back(std::make_shared<const Dataset>(data->subset(all.subspan(offset, len))));
    offset += len;
  }
  return shards;
}

}  // namespace fedmon
