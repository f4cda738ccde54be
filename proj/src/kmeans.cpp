#include "voe/kmeans.hpp"

#include <limits>
#include <map>

#include "voe/errors.hpp"
#include "voe/random.hpp"

namespace voe {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

std::pair<std::size_t, double> nearest(const std::vector<std::vector<double>>& centroids, std::span<const double> p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(centroids[c], p);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return {best, best_d};
}

KMeansFit lloyd(std::span<const std::vector<double>* const> points, std::size_t k, Rng& rng,
                const KMeansOptions& options) {
  const std::size_t n = points.size();
  const std::size_t dim = points[0]->size();
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);

  // k-means++ seeding.
  centroids.push_back(*points[rng.index(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(*points[i], centroids[0]);
  while (centroids.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = 0;
    if (total > 0.0) {
      pick = rng.categorical(d2);
    } else {
      pick = rng.index(n);
    }
    centroids.push_back(*points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(*points[i], centroids.back()));
  }

  std::vector<std::size_t> labels(n, 0);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    bool changed = iter == 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = nearest(centroids, *points[i]).first;
      if (c != labels[i]) {
        labels[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++sizes[labels[i]];
      for (std::size_t j = 0; j < dim; ++j) sums[labels[i]][j] += (*points[i])[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;  // empty clusters keep their centroid
      for (std::size_t j = 0; j < dim; ++j) centroids[c][j] = sums[c][j] / static_cast<double>(sizes[c]);
    }
  }

  KMeansFit fit;
  fit.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [c, d] = nearest(centroids, *points[i]);
    fit.labels[i] = c;
    fit.inertia += d;
  }
  fit.model.centroids = std::move(centroids);
  return fit;
}

}  // namespace

std::size_t KMeansModel::assign(std::span<const double> point) const {
  if (centroids.empty()) throw DataError("centroids", "clustering has no centroids");
  if (point.size() != dimension()) {
    throw DataError("dimension", "vector of dimension " + std::to_string(point.size()) +
                                     " does not match clustering dimension " + std::to_string(dimension()));
  }
  return nearest(centroids, point).first;
}

KMeansFit kmeans(std::span<const std::vector<double>* const> points, std::size_t k, std::uint64_t seed,
                 const KMeansOptions& options) {
  if (points.empty()) throw DataError("points", "cannot cluster an empty set");
  if (k == 0) throw ConfigError("cluster count must be at least 1");
  const std::size_t dim = points[0]->size();
  for (const auto* p : points) {
    if (p->size() != dim) throw DataError("dimension", "points to cluster must share one dimension");
  }

  std::map<std::vector<double>, std::size_t> distinct;
  std::vector<std::vector<double>> distinct_order;
  for (const auto* p : points) {
    if (distinct.try_emplace(*p, distinct_order.size()).second) distinct_order.push_back(*p);
    if (distinct_order.size() > k) break;
  }
  if (distinct_order.size() <= k) {
    KMeansFit fit;
    fit.model.centroids = std::move(distinct_order);
    fit.labels.reserve(points.size());
    for (const auto* p : points) fit.labels.push_back(distinct.at(*p));
    return fit;
  }

  KMeansFit best;
  bool have_best = false;
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, r));
    auto fit = lloyd(points, k, rng, options);
    if (!have_best || fit.inertia < best.inertia) {
      best = std::move(fit);
      have_best = true;
    }
  }
  return best;
}

}  // namespace voe
