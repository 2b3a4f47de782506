#pragma once

// Domain model shared by every stage of the pipeline: regions, POI counts,
// origin/destination heatmaps and the learned embedding matrix.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "remvc/numkit.hpp"

namespace remvc {

inline constexpr int kDatasetFormatVersion = 1;

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
  bool operator==(const LonLat&) const = default;
};

/// Regions are addressed by dense ids 0..count-1.
struct RegionSet {
  std::size_t count = 0;
  std::vector<std::string> names;             // empty or one per region
  std::optional<std::vector<LonLat>> centroids;
  bool operator==(const RegionSet&) const = default;
};

/// L x F matrix of POI counts per region and category.
struct PoiCounts {
  std::size_t regions = 0;
  std::size_t categories = 0;
  std::vector<std::int64_t> data;  // row-major
  std::vector<std::string> category_names;

  PoiCounts() = default;
  PoiCounts(std::size_t l, std::size_t f) : regions(l), categories(f), data(l * f, 0) {}

  std::span<const std::int64_t> row(std::size_t k) const {
    return {data.data() + k * categories, categories};
  }
  std::span<std::int64_t> row(std::size_t k) { return {data.data() + k * categories, categories}; }
  std::int64_t& at(std::size_t k, std::size_t c) { return data[k * categories + c]; }
  std::int64_t at(std::size_t k, std::size_t c) const { return data[k * categories + c]; }
  bool operator==(const PoiCounts&) const = default;
};

/// Per-region heatmaps. ms(k)[h*L + j] counts trips from region j into k at
/// hour h; md(k)[h*L + j] counts trips from k into j at hour h. Stored raw
/// (trip counts) and normalized where they enter an encoder.
struct MobilityHeatmaps {
  std::size_t hours = 0;
  std::size_t regions = 0;
  std::vector<double> ms_data;  // regions blocks of hours x regions
  std::vector<double> md_data;

  MobilityHeatmaps() = default;
  MobilityHeatmaps(std::size_t h, std::size_t l)
      : hours(h), regions(l), ms_data(l * h * l, 0.0), md_data(l * h * l, 0.0) {}

  std::size_t block() const { return hours * regions; }
  std::span<const double> ms(std::size_t k) const { return {ms_data.data() + k * block(), block()}; }
  std::span<const double> md(std::size_t k) const { return {md_data.data() + k * block(), block()}; }
  std::span<double> ms(std::size_t k) { return {ms_data.data() + k * block(), block()}; }
  std::span<double> md(std::size_t k) { return {md_data.data() + k * block(), block()}; }
  bool operator==(const MobilityHeatmaps&) const = default;
};

struct Dataset {
  RegionSet regions;
  PoiCounts poi;
  MobilityHeatmaps heatmaps;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<double>> popularity;

  std::size_t size() const { return regions.count; }
  bool operator==(const Dataset&) const = default;
};

struct EmbeddingMatrix {
  Dense values;  // L x (poi_width + mob_width)
  std::size_t poi_width = 0;
  std::size_t mob_width = 0;
};

/// Category ratios of one region; the zero vector for a region without POIs.
std::vector<double> poi_ratios(const PoiCounts& counts, std::size_t region);
std::vector<double> poi_ratios(std::span<const std::int64_t> row);

/// Divide by the total mass. All-zero input is returned unchanged.
std::vector<double> normalize_heatmap(std::span<const double> m);

/// Every invariant violation found, one message each. Never throws.
std::vector<std::string> validate(const Dataset& dataset);

nlohmann::json to_json(const Dataset& dataset);
Dataset dataset_from_json(const nlohmann::json& doc);

std::string serialize(const Dataset& dataset);
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& dataset, const std::string& path);

/// FNV-1a 64 of the serialized dataset, as 16 hex digits.
std::string fingerprint(const Dataset& dataset);

/// Write via a temporary sibling and rename, so readers never see a
/// partially written file.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

/// "region_id,e_0,..." then one row per region, 17 significant digits.
std::string format_embeddings_csv(const Dense& embeddings);
/// Inverse of format_embeddings_csv; rows must be in region id order.
Dense parse_embeddings_csv(const std::string& text);

}  // namespace remvc
