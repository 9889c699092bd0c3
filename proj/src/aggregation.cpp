#include "fedmon/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedmon/errors.hpp"

namespace fedmon {

std::string_view to_string(AggregationKind kind) {
  switch (kind) {
    case AggregationKind::fedavg: return "fedavg";
    case AggregationKind::krum: return "krum";
    case AggregationKind::geomed: return "geomed";
    case AggregationKind::bulyan: return "bulyan";
  }
  return "fedavg";
}

AggregationKind aggregation_kind_from_string(std::string_view name) {
  if (name == "fedavg") return AggregationKind::fedavg;
  if (name == "krum") return AggregationKind::krum;
  if (name == "geomed") return AggregationKind::geomed;
  if (name == "bulyan") return AggregationKind::bulyan;
  throw PreconditionError("unknown aggregation rule '" + std::string(name) + "'");
}

std::size_t AggregationRule::min_inputs() const {
  switch (kind) {
    case AggregationKind::krum: return 2 * m + 3;
    case AggregationKind::bulyan: return 4 * m + 3;
    default: return 1;
  }
}

namespace {

std::size_t common_dim(std::span<const ParamVector> vectors) {
  if (vectors.empty()) throw PreconditionError("aggregation: no input vectors");
  const std::size_t d = vectors.front().size();
  for (const auto& v : vectors)
    if (v.size() != d) throw DimensionError("aggregation: input vectors differ in length");
  return d;
}

double squared_distance(const ParamVector& a, const ParamVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

double distance(const ParamVector& a, const ParamVector& b) {
  return std::sqrt(squared_distance(a, b));
}

// Krum scoring with an explicit neighbour count, shared with Bulyan's
// selection stage where the candidate pool shrinks below 2m + 3. Equal
// scores go to the lowest index, or with value_ties to the lexicographically
// smallest vector (mutual nearest neighbours tie exactly when one neighbour
// is counted).
std::size_t krum_select(std::span<const ParamVector> vectors, std::size_t neighbours,
                        std::vector<double>* scores_out, bool value_ties = false) {
  const std::size_t n = vectors.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dist[i * n + j] = dist[j * n + i] = squared_distance(vectors[i], vectors[j]);

  std::vector<double> scores(n, 0.0);
  std::vector<double> others;
  others.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    others.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(dist[i * n + j]);
    const std::size_t k = std::min(neighbours, others.size());
    std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k),
                      others.end());
    scores[i] = std::accumulate(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k),
                                0.0);
  }
  auto best = static_cast<std::size_t>(
      std::min_element(scores.begin(), scores.end()) - scores.begin());
  if (value_ties)
    for (std::size_t i = best + 1; i < n; ++i)
      if (scores[i] == scores[best] && vectors[i] < vectors[best]) best = i;
  if (scores_out) *scores_out = std::move(scores);
  return best;
}

}  // namespace

ParamVector fedavg(std::span<const ParamVector> deltas, std::span<const double> alphas) {
  const std::size_t d = common_dim(deltas);
  if (alphas.size() != deltas.size())
    throw DimensionError("fedavg: number of weights differs from number of deltas");
  const double total = std::accumulate(alphas.begin(), alphas.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9)
    throw PreconditionError("fedavg: weights must sum to 1 (got " + std::to_string(total) + ")");

  ParamVector out(d, 0.0);
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    const double a = alphas[k];
    const auto& v = deltas[k];
    for (std::size_t i = 0; i < d; ++i) out[i] += a * v[i];
  }
  return out;
}

KrumResult krum(std::span<const ParamVector> vectors, std::size_t m) {
  common_dim(vectors);
  const std::size_t n = vectors.size();
  if (n < 2 * m + 3)
    throw PreconditionError("krum: requires n >= 2m + 3 (n=" + std::to_string(n) +
                            ", m=" + std::to_string(m) + ")");
  KrumResult out;
  out.chosen_index = krum_select(vectors, n - m - 2, &out.scores);
  out.chosen = vectors[out.chosen_index];
  return out;
}

ParamVector geomed(std::span<const ParamVector> vectors, double tol, std::size_t max_iter) {
  const std::size_t d = common_dim(vectors);
  const std::size_t n = vectors.size();
  if (n == 1) return vectors.front();

  ParamVector x(d, 0.0);
  for (const auto& v : vectors)
    for (std::size_t i = 0; i < d; ++i) x[i] += v[i];
  for (auto& xi : x) xi /= static_cast<double>(n);

  constexpr double kCoincident = 1e-12;
  ParamVector next(d);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double weight_sum = 0.0;
    std::fill(next.begin(), next.end(), 0.0);
    for (const auto& v : vectors) {
      const double dist = distance(x, v);
      if (dist < kCoincident) return v;
      const double w = 1.0 / dist;
      weight_sum += w;
      for (std::size_t i = 0; i < d; ++i) next[i] += w * v[i];
    }
    for (auto& ni : next) ni /= weight_sum;
    const double step = distance(x, next);
    x.swap(next);
    if (step < tol) break;
  }
  // Weiszfeld crawls when the optimum is an input point; take that point
  // if it already does better than the iterate.
  const auto objective = [&](const ParamVector& p) {
    double s = 0.0;
    for (const auto& v : vectors) s += distance(p, v);
    return s;
  };
  double best = objective(x);
  const ParamVector* pick = nullptr;
  for (const auto& v : vectors) {
    const double o = objective(v);
    if (o < best) {
      best = o;
      pick = &v;
    }
  }
  return pick ? *pick : x;
}

ParamVector bulyan(std::span<const ParamVector> vectors, std::size_t m) {
  const std::size_t d = common_dim(vectors);
  const std::size_t n = vectors.size();
  if (n < 4 * m + 3)
    throw PreconditionError("bulyan: requires n >= 4m + 3 (n=" + std::to_string(n) +
                            ", m=" + std::to_string(m) + ")");

  // Selection stage: Krum without replacement, n - 2m times.
  const std::size_t theta = n - 2 * m;
  std::vector<ParamVector> pool(vectors.begin(), vectors.end());
  std::vector<ParamVector> selected;
  selected.reserve(theta);
  while (selected.size() < theta) {
    const std::size_t remaining = pool.size();
    const std::size_t neighbours = remaining > m + 2 ? remaining - m - 2 : 1;
    const std::size_t pick = krum_select(pool, neighbours, nullptr, true);
    selected.push_back(std::move(pool[pick]));
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  // Aggregation stage: per coordinate, mean of the beta values nearest the median.
  const std::size_t beta = n - 4 * m;
  ParamVector out(d);
  std::vector<double> column(theta);
  std::vector<std::size_t> order(theta);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < theta; ++k) column[k] = selected[k][i];
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[(theta - 1) / 2];
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Ties on distance resolve by value so the result ignores input order.
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double da = std::abs(column[a] - median);
      const double db = std::abs(column[b] - median);
      return da != db ? da < db : column[a] < column[b];
    });
    double sum = 0.0;
    for (std::size_t k = 0; k < beta; ++k) sum += column[order[k]];
    out[i] = sum / static_cast<double>(beta);
  }
  return out;
}

ParamVector aggregate(const AggregationRule& rule, std::span<const ParamVector> deltas,
                      std::span<const double> alphas) {
  switch (rule.kind) {
    case AggregationKind::fedavg: return fedavg(deltas, alphas);
    case AggregationKind::krum: return krum(deltas, rule.m).chosen;
    case AggregationKind::geomed: return geomed(deltas, rule.tol, rule.max_iter);
    case AggregationKind::bulyan: return bulyan(deltas, rule.m);
  }
  throw PreconditionError("aggregate: unknown rule");
}

}  // namespace fedmon
