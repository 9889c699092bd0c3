#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fedmon/model.hpp"

namespace fedmon {

enum class AggregationKind { fedavg, krum, geomed, bulyan };

std::string_view to_string(AggregationKind kind);
AggregationKind aggregation_kind_from_string(std::string_view name);  // throws PreconditionError

struct AggregationRule {
  AggregationKind kind = AggregationKind::fedavg;
  std::size_t m = 1;  // assumed Byzantine count (krum, bulyan)
  double tol = 1e-8;  // geomed
  std::size_t max_iter = 1000;

  // Smallest number of inputs the rule accepts with its configured m.
  std::size_t min_inputs() const;
};

/// Weighted sum of `deltas`; alphas must sum to 1 within 1e-9.
ParamVector fedavg(std::span<const ParamVector> deltas, std::span<const double> alphas);

struct KrumResult {
  ParamVector chosen;
  std::size_t chosen_index = 0;
  std::vector<double> scores;
};

/// Scores every vector by the summed squared distance to its n - m - 2
/// nearest other vectors and picks the lowest score (lowest index on ties).
/// Requires n >= 2m + 3.
KrumResult krum(std::span<const ParamVector> vectors, std::size_t m);

/// Weiszfeld iteration from the coordinate-wise mean. Returns an input point
/// as soon as an iterate lands within 1e-12 of it, or at the end if some
/// input has a lower summed distance than the final iterate.
ParamVector geomed(std::span<const ParamVector> vectors, double tol = 1e-8,
                   std::size_t max_iter = 1000);

/// Iterated Krum selection of n - 2m vectors (score ties go to the
/// lexicographically smaller vector), then per coordinate the mean of
/// the n - 4m selected values closest to the selection's median.
/// Requires n >= 4m + 3.
ParamVector bulyan(std::span<const ParamVector> vectors, std::size_t m);

/// Dispatches on the rule. Robust rules ignore `alphas`.
ParamVector aggregate(const AggregationRule& rule, std::span<const ParamVector> deltas,
                      std::span<const double> alphas);

}  // namespace fedmon
