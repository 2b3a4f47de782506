#pragma once

#include <cstddef>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "remvc/core_types.hpp"

namespace remvc {

/// Seeded synthetic city with planted functional clusters. Defaults are the
/// desk-scale benchmark used by the acceptance suite.
struct SynthConfig {
  std::size_t regions = 80;
  std::size_t clusters = 4;
  std::size_t categories = 12;
  std::size_t hours = 24;
  std::size_t trips = 200000;
  double pois_per_region = 40.0;
  std::uint64_t seed = 42;
  double poi_signal = 0.5;
  double mob_signal = 0.8;

  void check() const;
};

nlohmann::json to_json(const SynthConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
SynthConfig synth_config_from_json(const nlohmann::json& doc);

/// Dataset with labels and popularity filled in. Regions go round-robin to
/// clusters and sit on a unit grid of centroids.
Dataset generate_city(const SynthConfig& cfg);

}  // namespace remvc
