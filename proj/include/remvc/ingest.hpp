#pragma once

// Raw geospatial inputs (GeoJSON region boundaries, trip / POI / check-in
// CSVs) into a Dataset.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "remvc/core_types.hpp"

namespace remvc {

struct TripRecord {
  double pickup_lon = 0.0;
  double pickup_lat = 0.0;
  double dropoff_lon = 0.0;
  double dropoff_lat = 0.0;
  std::string pickup_time;  // "YYYY-MM-DD HH:MM:SS", local naive time
};

struct PoiRecord {
  double lon = 0.0;
  double lat = 0.0;
  std::string category;
};

/// Outer ring of a simple polygon; implicitly closed.
struct RegionBoundary {
  std::size_t id = 0;
  std::vector<LonLat> ring;
  LonLat min{}, max{};  // bounding box
};

struct ParsedRegions {
  RegionSet regions;
  std::vector<RegionBoundary> boundaries;
};

ParsedRegions parse_regions(const nlohmann::json& feature_collection);
ParsedRegions parse_regions_file(const std::string& path);

/// Lowest-id polygon containing the point (edges count as inside), else none.
std::optional<std::size_t> assign_point(const std::vector<RegionBoundary>& boundaries, double lon,
                                        double lat);

/// Hour-of-day of a local timestamp, mapped onto `slices` equal bins.
int hour_of(const std::string& timestamp, int slices = 24);

struct HeatmapBuild {
  MobilityHeatmaps heatmaps;
  std::size_t accepted = 0;
  std::size_t skipped = 0;
};

/// Count each trip whose endpoints both resolve: MS_dst[h][src] and
/// MD_src[h][dst] each gain one. `threads` > 1 splits the stream into
/// contiguous chunks merged in chunk order; output does not depend on it.
HeatmapBuild build_heatmaps(const std::vector<TripRecord>& trips,
                            const std::vector<RegionBoundary>& boundaries, std::size_t regions,
                            std::size_t hours = 24, std::size_t threads = 1);

struct PoiBuild {
  PoiCounts counts;
  std::size_t accepted = 0;
  std::size_t skipped = 0;
};

/// Without a vocabulary, categories are numbered in first-seen order. With
/// one, POIs of unknown categories are skipped.
PoiBuild build_poi_counts(const std::vector<PoiRecord>& pois,
                          const std::vector<RegionBoundary>& boundaries, std::size_t regions,
                          const std::optional<std::vector<std::string>>& vocabulary = std::nullopt);

std::vector<TripRecord> read_trips_csv(const std::string& path);
std::vector<PoiRecord> read_pois_csv(const std::string& path);

/// region_id,count rows; missing regions are 0 and duplicates are summed.
std::vector<double> load_popularity(const std::string& path, std::size_t regions);

/// region_id,label rows covering every region exactly once.
std::vector<int> load_labels(const std::string& path, std::size_t regions);

struct IngestReport {
  std::size_t accepted_trips = 0;
  std::size_t skipped_trips = 0;
  std::size_t accepted_pois = 0;
  std::size_t skipped_pois = 0;
};

nlohmann::json to_json(const IngestReport& report);

struct IngestResult {
  Dataset dataset;
  IngestReport report;
};

IngestResult ingest_files(const std::string& regions_path, const std::string& trips_path,
                          const std::string& pois_path,
                          const std::optional<std::string>& popularity_path, std::size_t hours = 24,
                          std::size_t threads = 1);

/// Split one CSV line, honouring double quotes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace remvc
