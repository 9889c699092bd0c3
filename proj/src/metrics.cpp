#include "fedmon/metrics.hpp"

#include <algorithm>

#include "fedmon/errors.hpp"

namespace fedmon {

ConfusionCounts confusion(const std::set<std::size_t>& excluded,
                          const std::set<std::size_t>& truth,
                          const std::set<std::size_t>& all_workers) {
  if (!std::includes(all_workers.begin(), all_workers.end(), excluded.begin(), excluded.end()))
    throw PreconditionError("confusion: excluded set is not a subset of the workers");
  if (!std::includes(all_workers.begin(), all_workers.end(), truth.begin(), truth.end()))
    throw PreconditionError("confusion: truth set is not a subset of the workers");

  ConfusionCounts c;
  for (auto w : all_workers) {
    const bool flagged = excluded.contains(w);
    const bool bad = truth.contains(w);
    if (flagged && bad) ++c.tp;
    else if (flagged) ++c.fp;
    else if (bad) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double precision(const ConfusionCounts& c) noexcept {
  const auto denom = c.tp + c.fp;
  return denom == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

double recall(const ConfusionCounts& c) noexcept {
  const auto denom = c.tp + c.fn;
  return denom == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

double f_beta(double p, double r, double beta) noexcept {
  const double b2 = beta * beta;
  const double denom = b2 * p + r;
  if (denom == 0.0) return 0.0;
  return (1.0 + b2) * p * r / denom;
}

DetectionRecord detection_record(std::size_t round, const ConfusionCounts& counts,
                                 double beta) {
  DetectionRecord rec;
  rec.round = round;
  rec.counts = counts;
  rec.precision = precision(counts);
  rec.recall = recall(counts);
  rec.f2 = f_beta(rec.precision, rec.recall, beta);
  return rec;
}

}  // namespace fedmon
