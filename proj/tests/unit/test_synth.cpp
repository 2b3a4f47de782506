#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "remvc/errors.hpp"
#include "remvc/sampler.hpp"
#include "remvc/synth.hpp"
#include "remvc/eval.hpp"

using namespace remvc;

TEST_CASE("zero trips give all-zero heatmaps and round-robin labels") {
  SynthConfig c;
  c.regions = 8;
  c.clusters = 2;
  c.categories = 4;
  c.trips = 0;
  c.seed = 1;
  const Dataset d = generate_city(c);
  for (double v : d.heatmaps.ms_data) CHECK(v == 0.0);
  for (double v : d.heatmaps.md_data) CHECK(v == 0.0);
  CHECK(*d.labels == std::vector<int>{0, 1, 0, 1, 0, 1, 0, 1});
  CHECK(validate(d).empty());
}

TEST_CASE("same seed gives identical bytes") {
  SynthConfig c;
  c.regions = 12;
  c.trips = 3000;
  CHECK(serialize(generate_city(c)) == serialize(generate_city(c)));
  SynthConfig other = c;
  other.seed = 43;
  CHECK(serialize(generate_city(c)) != serialize(generate_city(other)));
}

TEST_CASE("trip mass is conserved") {
  SynthConfig c;
  c.regions = 10;
  c.trips = 5000;
  const Dataset d = generate_city(c);
  CHECK(std::accumulate(d.heatmaps.ms_data.begin(), d.heatmaps.ms_data.end(), 0.0) == 5000.0);
  CHECK(std::accumulate(d.heatmaps.md_data.begin(), d.heatmaps.md_data.end(), 0.0) == 5000.0);
  for (double p : *d.popularity) CHECK(p >= 0.0);
}

TEST_CASE("invalid configs") {
  SynthConfig c;
  c.clusters = c.regions + 1;
  CHECK_THROWS_AS(generate_city(c), ConfigError);
  SynthConfig s;
  s.poi_signal = 1.5;
  CHECK_THROWS_AS(s.check(), ConfigError);
  SynthConfig one;
  one.clusters = 1;
  CHECK_THROWS_AS(one.check(), ConfigError);
  CHECK_THROWS_AS(synth_config_from_json({{"L", 10}, {"colour", "red"}}), ConfigError);
  const auto parsed = synth_config_from_json({{"L", 10}, {"K", 3}});
  CHECK(parsed.regions == 10);
  CHECK(parsed.clusters == 3);
  CHECK(parsed.categories == SynthConfig{}.categories);
}

TEST_CASE("zero poi signal makes categories independent of clusters") {
  // Pool the category-by-cluster contingency table over 20 seeds and run a
  // chi-square independence test at the 1% level.
  const std::size_t K = 4, F = 6;
  std::vector<double> table(K * F, 0.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthConfig c;
    c.regions = 40;
    c.clusters = K;
    c.categories = F;
    c.trips = 0;
    c.poi_signal = 0.0;
    c.seed = seed;
    const Dataset d = generate_city(c);
    for (std::size_t k = 0; k < d.size(); ++k)
      for (std::size_t f = 0; f < F; ++f) table[(*d.labels)[k] * F + f] += static_cast<double>(d.poi.at(k, f));
  }
  std::vector<double> rows(K, 0.0), cols(F, 0.0);
  double n = 0;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t f = 0; f < F; ++f) {
      rows[k] += table[k * F + f];
      cols[f] += table[k * F + f];
      n += table[k * F + f];
    }
  double chi2 = 0;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t f = 0; f < F; ++f) {
      const double e = rows[k] * cols[f] / n;
      chi2 += (table[k * F + f] - e) * (table[k * F + f] - e) / e;
    }
  const double p = oracle::chi2_sf(chi2, static_cast<double>((K - 1) * (F - 1)));
  CHECK(p > 0.01);
}

TEST_CASE("chi-square oracle sanity") {
  CHECK(oracle::chi2_sf(0.0, 4) == 1.0);
  CHECK(oracle::chi2_sf(2.0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  CHECK(oracle::chi2_sf(15.0863, 5) == doctest::Approx(0.01).epsilon(1e-3));
}

TEST_CASE("full-signal benchmark is learnable from raw features") {
  SynthConfig c;
  c.poi_signal = 1.0;
  c.mob_signal = 1.0;
  const Dataset d = generate_city(c);
  const FeatureTable t = FeatureTable::from_dataset(d);
  Dense raw(d.size(), t.poi.cols + t.mobility.cols);
  for (std::size_t k = 0; k < d.size(); ++k) {
    std::size_t j = 0;
    for (double v : t.poi.row(k)) raw(k, j++) = v;
    for (double v : t.mobility.row(k)) raw(k, j++) = v;
  }
  const auto km = kmeans(raw, c.clusters, 42);
  CHECK(nmi(*d.labels, km.labels) >= 0.6);
}
