#pragma once

#include <cstddef>
#include <set>

namespace fedmon {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

// Excluded workers are the detector's positives; `truth` holds the workers
// that really are malicious. Throws PreconditionError unless both are subsets
// of `all_workers`.
ConfusionCounts confusion(const std::set<std::size_t>& excluded,
                          const std::set<std::size_t>& truth,
                          const std::set<std::size_t>& all_workers);

// Both return 0 when the denominator is 0.
double precision(const ConfusionCounts& c) noexcept;
double recall(const ConfusionCounts& c) noexcept;

// (1 + b^2) p r / (b^2 p + r); 0 when p and r are both 0.
double f_beta(double precision, double recall, double beta) noexcept;

struct DetectionRecord {
  std::size_t round = 0;
  ConfusionCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f2 = 0.0;
};

DetectionRecord detection_record(std::size_t round, const ConfusionCounts& counts,
                                 double beta = 2.0);

}  // namespace fedmon
