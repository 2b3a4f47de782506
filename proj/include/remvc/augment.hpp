#pragma once

// Positive-sample generators: POI-multiset perturbations for the POI view and
// Gaussian noise injection for the mobility view.

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "remvc/rng.hpp"

namespace remvc {

enum class PoiAugmentationKind { insertion, deletion, replacement };

struct PoiAugmentation {
  PoiAugmentationKind kind = PoiAugmentationKind::insertion;
  double p = 0.1;
};

struct MobilityAugmentation {
  double sigma = 0.0001;  // standard deviation of the additive noise
};

/// Inserted and replacement POIs draw their category from this distribution;
/// empty means uniform over categories.
using CategoryPrior = std::span<const double>;

/// Perturb the POI multiset described by `counts`, then return its ratios.
std::vector<double> augment_poi(std::span<const std::int64_t> counts, const PoiAugmentation& aug,
                                Rng& rng, CategoryPrior prior = {});

/// Same, returning the perturbed counts rather than ratios.
std::vector<std::int64_t> augment_poi_counts(std::span<const std::int64_t> counts,
                                             const PoiAugmentation& aug, Rng& rng,
                                             CategoryPrior prior = {});

struct HeatmapPair {
  std::vector<double> ms;
  std::vector<double> md;
};

/// Elementwise N(0, sigma^2) noise, clamped at zero, no renormalization.
HeatmapPair augment_mobility(std::span<const double> ms, std::span<const double> md,
                             const MobilityAugmentation& aug, Rng& rng);

/// One augmented ratio vector per strategy: insertion, deletion, replacement.
std::array<std::vector<double>, 3> positive_set_poi(std::span<const std::int64_t> counts, double p,
                                                    Rng& rng, CategoryPrior prior = {});

std::vector<HeatmapPair> positive_set_mob(std::span<const double> ms, std::span<const double> md,
                                          double sigma, Rng& rng);

}  // namespace remvc
