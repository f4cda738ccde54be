#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace voe {

struct KMeansOptions {
  std::size_t max_iterations = 100;
  std::size_t restarts = 3;
};

/// Centroids of a fitted clustering; assignment is to the nearest centroid
/// under Euclidean distance, ties to the lower cluster id.
struct KMeansModel {
  std::vector<std::vector<double>> centroids;

  std::size_t size() const noexcept { return centroids.size(); }
  std::size_t dimension() const noexcept { return centroids.empty() ? 0 : centroids.front().size(); }
  /// Throws DataError on dimension mismatch.
  std::size_t assign(std::span<const double> point) const;
};

struct KMeansFit {
  KMeansModel model;
  std::vector<std::size_t> labels;
  double inertia = 0.0;
};

/// k-means with k-means++ seeding and seeded restarts, keeping the lowest
/// inertia. When the points have at most k distinct values, each distinct
/// value becomes its own cluster (in order of first appearance). Final labels
/// are always the nearest-centroid assignment of the returned model.
KMeansFit kmeans(std::span<const std::vector<double>* const> points, std::size_t k, std::uint64_t seed,
                 const KMeansOptions& options = {});

}  // namespace voe
