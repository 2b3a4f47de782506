#include "remvc/sampler.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "remvc/errors.hpp"

namespace remvc {

FeatureTable FeatureTable::from_dataset(const Dataset& d) {
  const std::size_t L = d.size();
  FeatureTable t;
  t.poi = Dense(L, d.poi.categories);
  const std::size_t block = d.heatmaps.block();
  t.mobility = Dense(L, 2 * block);
  for (std::size_t k = 0; k < L; ++k) {
    auto r = poi_ratios(d.poi, k);
    std::copy(r.begin(), r.end(), t.poi.row(k).begin());
    auto ms = normalize_heatmap(d.heatmaps.ms(k));
    auto md = normalize_heatmap(d.heatmaps.md(k));
    auto row = t.mobility.row(k);
    std::copy(ms.begin(), ms.end(), row.begin());
    std::copy(md.begin(), md.end(), row.begin() + static_cast<std::ptrdiff_t>(block));
  }
  t.centroids = d.regions.centroids;
  return t;
}

double feature_distance(std::span<const double> a, std::span<const double> b, DistanceMetric metric) {
  if (a.size() != b.size()) throw ShapeError("feature_distance: length mismatch");
  if (metric == DistanceMetric::euclidean) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  }
  const double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return (na == nb) ? 0.0 : 1.0;
  return std::max(0.0, 1.0 - dot(a, b) / (na * nb));
}

SamplingWeights sampling_weights(std::size_t anchor, View view, NegativeStrategy strategy,
                                 const FeatureTable& features, DistanceMetric metric) {
  const std::size_t L = features.poi.rows;
  if (L < 2) throw RequestError("sampling_weights: need at least 2 regions");
  if (anchor >= L) throw IndexError("sampling_weights: anchor out of range");
  SamplingWeights w;
  w.anchor = anchor;
  for (std::size_t n = 0; n < L; ++n)
    if (n != anchor) w.candidates.push_back(n);
  w.probs.assign(w.candidates.size(), 0.0);

  if (strategy == NegativeStrategy::euclidean && !features.centroids)
    throw ConfigError("euclidean negative sampling needs region centroids");
  if (strategy != NegativeStrategy::uniform) {
    for (std::size_t i = 0; i < w.candidates.size(); ++i) {
      const std::size_t n = w.candidates[i];
      if (strategy == NegativeStrategy::feature_distance) {
        const auto& m = features.of(view);
        w.probs[i] = feature_distance(m.row(anchor), m.row(n), metric);
      } else {
        const auto& a = (*features.centroids)[anchor];
        const auto& b = (*features.centroids)[n];
        w.probs[i] = std::hypot(a.lon - b.lon, a.lat - b.lat);
      }
    }
  }
  const double total = std::accumulate(w.probs.begin(), w.probs.end(), 0.0);
  if (total > 0.0) {
    for (auto& p : w.probs) p /= total;
  } else {
    std::fill(w.probs.begin(), w.probs.end(), 1.0 / static_cast<double>(w.candidates.size()));
  }
  return w;
}

std::vector<std::size_t> sample_negatives(const SamplingWeights& weights, std::size_t n, Rng& rng) {
  const std::size_t m = weights.candidates.size();
  if (n > m)
    throw RequestError("sample_negatives: requested " + std::to_string(n) + " from " +
                       std::to_string(m) + " candidates");
  std::vector<double> w = weights.probs;
  std::vector<bool> taken(m, false);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> out;
  out.reserve(n);
  double mass = std::accumulate(w.begin(), w.end(), 0.0);
  for (std::size_t draw = 0; draw < n; ++draw) {
    std::size_t pick = m;
    if (mass > 1e-300) {
      const double u = unit(rng) * mass;
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (taken[i] || w[i] <= 0.0) continue;
        acc += w[i];
        pick = i;
        if (u < acc) break;
      }
    }
    if (pick == m) {
      std::size_t remaining = 0;
      for (std::size_t i = 0; i < m; ++i) remaining += !taken[i];
      auto r = std::uniform_int_distribution<std::size_t>(0, remaining - 1)(rng);
      for (std::size_t i = 0; i < m; ++i) {
        if (taken[i]) continue;
        if (r-- == 0) {
          pick = i;
          break;
        }
      }
    }
    taken[pick] = true;
    mass -= w[pick];
    w[pick] = 0.0;
    // Recompute rather than trust repeated subtraction near zero.
    if (mass < 1e-12) mass = std::accumulate(w.begin(), w.end(), 0.0);
    out.push_back(weights.candidates[pick]);
  }
  return out;
}

std::vector<std::size_t> sample_inter_negatives(std::size_t anchor, std::size_t regions, std::size_t n,
                                                Rng& rng) {
  if (regions < 1 || n > regions - 1)
    throw RequestError("sample_inter_negatives: requested " + std::to_string(n) + " of " +
                       std::to_string(regions - 1) + " candidates");
  std::vector<std::size_t> pool;
  pool.reserve(regions - 1);
  for (std::size_t k = 0; k < regions; ++k)
    if (k != anchor) pool.push_back(k);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < n; ++i) {
    auto j = std::uniform_int_distribution<std::size_t>(i, pool.size() - 1)(rng);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

NegativeSampler::NegativeSampler(const FeatureTable& features, View view, NegativeStrategy strategy,
                                 DistanceMetric metric) {
  const std::size_t L = features.poi.rows;
  table_.reserve(L);
  for (std::size_t k = 0; k < L; ++k) table_.push_back(sampling_weights(k, view, strategy, features, metric));
}

}  // namespace remvc
