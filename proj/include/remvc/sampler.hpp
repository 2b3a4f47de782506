#pragma once

// Negative sampling for the intra-view and inter-view objectives.

#include <cstddef>
#include <optional>
#include <vector>

#include "remvc/core_types.hpp"
#include "remvc/rng.hpp"

namespace remvc {

enum class NegativeStrategy { feature_distance, euclidean, uniform };
enum class View { poi, mobility };
enum class DistanceMetric { euclidean, cosine };

/// Per-region feature rows used for distances: POI ratios, and the
/// normalized MS followed by normalized MD, flattened row-major.
struct FeatureTable {
  Dense poi;
  Dense mobility;
  std::optional<std::vector<LonLat>> centroids;

  static FeatureTable from_dataset(const Dataset& d);
  const Dense& of(View v) const { return v == View::poi ? poi : mobility; }
};

double feature_distance(std::span<const double> a, std::span<const double> b, DistanceMetric metric);

/// Sampling distribution over every region except the anchor.
struct SamplingWeights {
  std::size_t anchor = 0;
  std::vector<std::size_t> candidates;
  std::vector<double> probs;
};

/// Weights proportional to distance from the anchor (feature space for
/// feature_distance, planar centroid distance for euclidean), or uniform.
/// All-zero distances fall back to uniform.
SamplingWeights sampling_weights(std::size_t anchor, View view, NegativeStrategy strategy,
                                 const FeatureTable& features,
                                 DistanceMetric metric = DistanceMetric::euclidean);

/// n distinct candidates, drawn sequentially without replacement with the
/// remaining weights renormalized after each draw. Once the remaining mass is
/// zero, the rest are drawn uniformly.
std::vector<std::size_t> sample_negatives(const SamplingWeights& weights, std::size_t n, Rng& rng);

/// n distinct regions other than the anchor, uniformly.
std::vector<std::size_t> sample_inter_negatives(std::size_t anchor, std::size_t regions, std::size_t n,
                                                Rng& rng);

/// Weight vectors for every anchor, computed once per (view, strategy).
class NegativeSampler {
 public:
  NegativeSampler(const FeatureTable& features, View view, NegativeStrategy strategy,
                  DistanceMetric metric = DistanceMetric::euclidean);

  const SamplingWeights& weights(std::size_t anchor) const { return table_.at(anchor); }
  std::vector<std::size_t> sample(std::size_t anchor, std::size_t n, Rng& rng) const {
    return sample_negatives(table_.at(anchor), n, rng);
  }

 private:
  std::vector<SamplingWeights> table_;
};

}  // namespace remvc
