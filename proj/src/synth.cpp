#include "remvc/synth.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "remvc/errors.hpp"
#include "remvc/rng.hpp"

namespace remvc {

using nlohmann::json;

namespace {

constexpr double kConcentration = 0.3;

std::vector<double> dirichlet(std::size_t n, double alpha, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> out(n);
  double total = 0.0;
  for (auto& x : out) {
    x = gamma(rng);
    total += x;
  }
  if (total <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
    return out;
  }
  for (auto& x : out) x /= total;
  return out;
}

std::vector<double> mix_uniform(const std::vector<double>& profile, double signal) {
  std::vector<double> out(profile.size());
  const double u = 1.0 / static_cast<double>(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i) out[i] = signal * profile[i] + (1.0 - signal) * u;
  return out;
}

}  // namespace

void SynthConfig::check() const {
  if (clusters < 2) throw ConfigError("synth: need at least 2 clusters");
  if (regions < clusters) throw ConfigError("synth: region count must be >= cluster count");
  if (categories < 1) throw ConfigError("synth: need at least one POI category");
  if (hours < 1) throw ConfigError("synth: need at least one time slice");
  if (!(pois_per_region >= 0.0)) throw ConfigError("synth: pois_per_region must be >= 0");
  if (!(poi_signal >= 0.0 && poi_signal <= 1.0)) throw ConfigError("synth: poi_signal must be in [0,1]");
  if (!(mob_signal >= 0.0 && mob_signal <= 1.0)) throw ConfigError("synth: mob_signal must be in [0,1]");
}

json to_json(const SynthConfig& c) {
  return json{{"L", c.regions},          {"K", c.clusters},
              {"F", c.categories},       {"H", c.hours},
              {"trips", c.trips},        {"pois_per_region", c.pois_per_region},
              {"seed", c.seed},          {"poi_signal", c.poi_signal},
              {"mob_signal", c.mob_signal}};
}

SynthConfig synth_config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("synth config must be a JSON object");
  static const std::set<std::string> known{"L", "K", "F", "H", "trips", "pois_per_region",
                                           "seed", "poi_signal", "mob_signal"};
  for (const auto& [key, _] : doc.items())
    if (!known.count(key)) throw ConfigError("synth config: unknown key '" + key + "'");
  SynthConfig c;
  try {
    c.regions = doc.value("L", c.regions);
    c.clusters = doc.value("K", c.clusters);
    c.categories = doc.value("F", c.categories);
    c.hours = doc.value("H", c.hours);
    c.trips = doc.value("trips", c.trips);
    c.pois_per_region = doc.value("pois_per_region", c.pois_per_region);
    c.seed = doc.value("seed", c.seed);
    c.poi_signal = doc.value("poi_signal", c.poi_signal);
    c.mob_signal = doc.value("mob_signal", c.mob_signal);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  c.check();
  return c;
}

Dataset generate_city(const SynthConfig& cfg) {
  cfg.check();
  const std::size_t L = cfg.regions, K = cfg.clusters, F = cfg.categories, H = cfg.hours;
  Rng rng(cfg.seed);

  // Cluster profiles.
  std::vector<std::vector<double>> category_profile(K), hour_profile(K), dest_preference(K);
  for (std::size_t c = 0; c < K; ++c) {
    category_profile[c] = dirichlet(F, kConcentration, rng);
    hour_profile[c] = dirichlet(H, kConcentration, rng);
    dest_preference[c] = dirichlet(K, kConcentration, rng);
  }

  Dataset d;
  d.regions.count = L;
  std::vector<int> labels(L);
  std::vector<std::vector<std::size_t>> members(K);
  for (std::size_t k = 0; k < L; ++k) {
    labels[k] = static_cast<int>(k % K);
    members[k % K].push_back(k);
  }
  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(L))));
  std::vector<LonLat> centroids(L);
  for (std::size_t k = 0; k < L; ++k)
    centroids[k] = {static_cast<double>(k % side) + 0.5, static_cast<double>(k / side) + 0.5};
  d.regions.centroids = std::move(centroids);

  // POIs: Poisson count per region, categories from the mixed profile.
  d.poi = PoiCounts(L, F);
  for (std::size_t c = 0; c < F; ++c) d.poi.category_names.push_back("cat" + std::to_string(c));
  std::poisson_distribution<long long> n_pois(cfg.pois_per_region);
  std::vector<std::discrete_distribution<std::size_t>> poi_dist;
  for (std::size_t c = 0; c < K; ++c) {
    auto w = mix_uniform(category_profile[c], cfg.poi_signal);
    poi_dist.emplace_back(w.begin(), w.end());
  }
  for (std::size_t k = 0; k < L; ++k) {
    const long long n = cfg.pois_per_region > 0.0 ? n_pois(rng) : 0;
    for (long long i = 0; i < n; ++i) d.poi.at(k, poi_dist[static_cast<std::size_t>(labels[k])](rng)) += 1;
  }

  // Trips: uniform source, hour from the source cluster, destination from
  // the source cluster's preferred clusters mixed with uniform noise.
  d.heatmaps = MobilityHeatmaps(H, L);
  std::uniform_int_distribution<std::size_t> any_region(0, L - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::discrete_distribution<std::size_t>> hour_dist, cluster_dist;
  for (std::size_t c = 0; c < K; ++c) {
    hour_dist.emplace_back(hour_profile[c].begin(), hour_profile[c].end());
    cluster_dist.emplace_back(dest_preference[c].begin(), dest_preference[c].end());
  }
  std::vector<double> inbound(L, 0.0);
  for (std::size_t t = 0; t < cfg.trips; ++t) {
    const std::size_t src = any_region(rng);
    const auto sc = static_cast<std::size_t>(labels[src]);
    const std::size_t h = hour_dist[sc](rng);
    std::size_t dst;
    if (coin(rng) < cfg.mob_signal) {
      const auto& pool = members[cluster_dist[sc](rng)];
      dst = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    } else {
      dst = any_region(rng);
    }
    d.heatmaps.ms(dst)[h * L + src] += 1.0;
    d.heatmaps.md(src)[h * L + dst] += 1.0;
    inbound[dst] += 1.0;
  }

  const double mean_inbound = std::accumulate(inbound.begin(), inbound.end(), 0.0) / static_cast<double>(L);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> popularity(L);
  for (std::size_t k = 0; k < L; ++k)
    popularity[k] = std::max(0.0, inbound[k] + 0.05 * mean_inbound * noise(rng));

  d.labels = std::move(labels);
  d.popularity = std::move(popularity);
  return d;
}

}  // namespace remvc
