#include "remvc/augment.hpp"

#include <random>

#include "remvc/core_types.hpp"
#include "remvc/errors.hpp"

namespace remvc {

namespace {

class CategoryPicker {
 public:
  CategoryPicker(std::size_t categories, CategoryPrior prior)
      : uniform_(0, categories - 1), use_prior_(!prior.empty()) {
    if (use_prior_) {
      if (prior.size() != categories) throw ShapeError("augment_poi: prior length != category count");
      weighted_ = std::discrete_distribution<std::size_t>(prior.begin(), prior.end());
    }
  }
  std::size_t operator()(Rng& rng) { return use_prior_ ? weighted_(rng) : uniform_(rng); }

 private:
  std::uniform_int_distribution<std::size_t> uniform_;
  std::discrete_distribution<std::size_t> weighted_;
  bool use_prior_;
};

}  // namespace

std::vector<std::int64_t> augment_poi_counts(std::span<const std::int64_t> counts,
                                             const PoiAugmentation& aug, Rng& rng,
                                             CategoryPrior prior) {
  if (!(aug.p >= 0.0 && aug.p <= 1.0)) throw ConfigError("augment_poi: p must be in [0,1]");
  std::vector<std::int64_t> out(counts.begin(), counts.end());
  if (aug.p == 0.0 || counts.empty()) return out;
  CategoryPicker pick(counts.size(), prior);
  switch (aug.kind) {
    case PoiAugmentationKind::insertion: {
      // Each existing POI independently spawns one random POI.
      std::int64_t n = 0;
      for (auto c : counts) n += c;
      const auto added = std::binomial_distribution<std::int64_t>(n, aug.p)(rng);
      for (std::int64_t i = 0; i < added; ++i) out[pick(rng)] += 1;
      break;
    }
    case PoiAugmentationKind::deletion:
      for (std::size_t c = 0; c < out.size(); ++c)
        if (counts[c] > 0) out[c] -= std::binomial_distribution<std::int64_t>(counts[c], aug.p)(rng);
      break;
    case PoiAugmentationKind::replacement: {
      std::int64_t moved = 0;
      for (std::size_t c = 0; c < out.size(); ++c) {
        if (counts[c] == 0) continue;
        const auto r = std::binomial_distribution<std::int64_t>(counts[c], aug.p)(rng);
        out[c] -= r;
        moved += r;
      }
      for (std::int64_t i = 0; i < moved; ++i) out[pick(rng)] += 1;
      break;
    }
  }
  return out;
}

std::vector<double> augment_poi(std::span<const std::int64_t> counts, const PoiAugmentation& aug,
                                Rng& rng, CategoryPrior prior) {
  return poi_ratios(augment_poi_counts(counts, aug, rng, prior));
}

HeatmapPair augment_mobility(std::span<const double> ms, std::span<const double> md,
                             const MobilityAugmentation& aug, Rng& rng) {
  if (!(aug.sigma >= 0.0)) throw ConfigError("augment_mobility: sigma must be >= 0");
  HeatmapPair out{{ms.begin(), ms.end()}, {md.begin(), md.end()}};
  if (aug.sigma == 0.0) return out;
  std::normal_distribution<double> noise(0.0, aug.sigma);
  for (auto& v : out.ms) v = std::max(0.0, v + noise(rng));
  for (auto& v : out.md) v = std::max(0.0, v + noise(rng));
  return out;
}

std::array<std::vector<double>, 3> positive_set_poi(std::span<const std::int64_t> counts, double p,
                                                    Rng& rng, CategoryPrior prior) {
  return {augment_poi(counts, {PoiAugmentationKind::insertion, p}, rng, prior),
          augment_poi(counts, {PoiAugmentationKind::deletion, p}, rng, prior),
          augment_poi(counts, {PoiAugmentationKind::replacement, p}, rng, prior)};
}

std::vector<HeatmapPair> positive_set_mob(std::span<const double> ms, std::span<const double> md,
                                          double sigma, Rng& rng) {
  return {augment_mobility(ms, md, {sigma}, rng)};
}

}  // namespace remvc
