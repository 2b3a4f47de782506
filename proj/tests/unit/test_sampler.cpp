#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "remvc/errors.hpp"
#include "remvc/sampler.hpp"
#include "remvc/synth.hpp"

using namespace remvc;

namespace {

/// Regions whose POI rows sit at chosen distances from region 0.
FeatureTable line_table(const std::vector<double>& xs) {
  FeatureTable t;
  t.poi = Dense(xs.size(), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) t.poi(i, 0) = xs[i];
  t.mobility = t.poi;
  return t;
}

SamplingWeights manual(std::vector<double> probs) {
  SamplingWeights w;
  w.anchor = probs.size();
  for (std::size_t i = 0; i < probs.size(); ++i) w.candidates.push_back(i);
  w.probs = std::move(probs);
  return w;
}

Dataset small_city() {
  SynthConfig c;
  c.regions = 12;
  c.trips = 4000;
  c.seed = 3;
  return generate_city(c);
}

}  // namespace

TEST_CASE("feature distance weights normalize") {
  const auto t = line_table({0.0, 1.0, 3.0});
  const auto w = sampling_weights(0, View::poi, NegativeStrategy::feature_distance, t);
  CHECK(w.candidates == std::vector<std::size_t>{1, 2});
  CHECK(w.probs[0] == doctest::Approx(0.25));
  CHECK(w.probs[1] == doctest::Approx(0.75));
}

TEST_CASE("identical candidates fall back to uniform") {
  const auto t = line_table({2.0, 2.0, 2.0, 2.0});
  const auto w = sampling_weights(1, View::poi, NegativeStrategy::feature_distance, t);
  for (double p : w.probs) CHECK(p == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("weights exclude the anchor and sum to one for every strategy and view") {
  const Dataset d = small_city();
  const FeatureTable t = FeatureTable::from_dataset(d);
  for (auto strategy : {NegativeStrategy::feature_distance, NegativeStrategy::euclidean, NegativeStrategy::uniform})
    for (auto view : {View::poi, View::mobility})
      for (auto metric : {DistanceMetric::euclidean, DistanceMetric::cosine})
        for (std::size_t a = 0; a < d.size(); ++a) {
          const auto w = sampling_weights(a, view, strategy, t, metric);
          CHECK(w.candidates.size() == d.size() - 1);
          CHECK(std::find(w.candidates.begin(), w.candidates.end(), a) == w.candidates.end());
          CHECK(std::abs(std::accumulate(w.probs.begin(), w.probs.end(), 0.0) - 1.0) <= 1e-12);
          for (double p : w.probs) CHECK(p >= 0.0);
        }
}

TEST_CASE("uniform strategy gives 1/(L-1)") {
  const auto t = line_table({0, 1, 5, 9});
  const auto w = sampling_weights(2, View::poi, NegativeStrategy::uniform, t);
  for (double p : w.probs) CHECK(p == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("scaling all features leaves feature-distance weights unchanged") {
  const auto a = line_table({0.0, 1.0, 3.0, 7.5});
  const auto b = line_table({0.0, 4.0, 12.0, 30.0});
  const auto wa = sampling_weights(0, View::poi, NegativeStrategy::feature_distance, a);
  const auto wb = sampling_weights(0, View::poi, NegativeStrategy::feature_distance, b);
  for (std::size_t i = 0; i < wa.probs.size(); ++i) CHECK(wa.probs[i] == doctest::Approx(wb.probs[i]).epsilon(1e-12));
}

TEST_CASE("euclidean strategy uses centroids and needs them") {
  auto t = line_table({0, 0, 0});
  CHECK_THROWS_AS(sampling_weights(0, View::poi, NegativeStrategy::euclidean, t), ConfigError);
  t.centroids = std::vector<LonLat>{{0, 0}, {3, 4}, {0, 15}};
  const auto w = sampling_weights(0, View::poi, NegativeStrategy::euclidean, t);
  CHECK(w.probs[0] == doctest::Approx(0.25));
  CHECK(w.probs[1] == doctest::Approx(0.75));
}

TEST_CASE("degenerate weight always draws the heavy candidate") {
  const auto w = manual({0.0, 1.0});
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(s);
    CHECK(sample_negatives(w, 1, rng) == std::vector<std::size_t>{1});
  }
}

TEST_CASE("drawing every candidate returns a permutation") {
  const auto w = manual({0.1, 0.0, 0.6, 0.3});
  Rng rng(8);
  auto all = sample_negatives(w, 4, rng);
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK_THROWS_AS(sample_negatives(w, 5, rng), RequestError);
}

TEST_CASE("Monte-Carlo frequency of a single weighted draw") {
  const auto w = manual({0.25, 0.75});
  Rng rng(9);
  const int trials = 100000;
  int second = 0;
  for (int i = 0; i < trials; ++i) second += sample_negatives(w, 1, rng)[0] == 1;
  CHECK(std::abs(second / static_cast<double>(trials) - 0.75) <= 0.01);
}

TEST_CASE("second draw follows the renormalized weights") {
  // Exact probability that candidate 2 is drawn second among {0.5, 0.3, 0.2}:
  // 0.5*0.2/0.5 + 0.3*0.2/0.7.
  const auto w = manual({0.5, 0.3, 0.2});
  Rng rng(10);
  const int trials = 100000;
  int hits = 0;
  for (int i = 0; i < trials; ++i) hits += sample_negatives(w, 2, rng)[1] == 2;
  const double exact = 0.5 * 0.2 / 0.5 + 0.3 * 0.2 / 0.7;
  CHECK(std::abs(hits / static_cast<double>(trials) - exact) <= 0.01);
}

TEST_CASE("inter negatives") {
  Rng rng(11);
  CHECK(sample_inter_negatives(0, 2, 1, rng) == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(sample_inter_negatives(0, 3, 3, rng), RequestError);
  for (int i = 0; i < 10000; ++i) {
    const auto s = sample_inter_negatives(4, 10, 5, rng);
    CHECK(std::find(s.begin(), s.end(), 4) == s.end());
    CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 5);
  }
  Rng a(12), b(12);
  CHECK(sample_inter_negatives(1, 50, 5, a) == sample_inter_negatives(1, 50, 5, b));
}

TEST_CASE("sampled negatives never repeat or include the anchor") {
  const Dataset d = small_city();
  const FeatureTable t = FeatureTable::from_dataset(d);
  NegativeSampler sampler(t, View::mobility, NegativeStrategy::feature_distance);
  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t anchor = static_cast<std::size_t>(i) % d.size();
    const auto s = sampler.sample(anchor, 6, rng);
    CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 6);
    CHECK(std::find(s.begin(), s.end(), anchor) == s.end());
  }
}

TEST_CASE("feature table rows") {
  const Dataset d = small_city();
  const FeatureTable t = FeatureTable::from_dataset(d);
  CHECK(t.poi.cols == d.poi.categories);
  CHECK(t.mobility.cols == 2 * d.heatmaps.block());
  const auto r = poi_ratios(d.poi, 5);
  for (std::size_t c = 0; c < r.size(); ++c) CHECK(t.poi(5, c) == r[c]);
  CHECK(feature_distance(std::vector<double>{0, 0}, std::vector<double>{3, 4}, DistanceMetric::euclidean) == 5.0);
  CHECK(feature_distance(std::vector<double>{1, 0}, std::vector<double>{0, 2}, DistanceMetric::cosine) ==
        doctest::Approx(1.0));
}
