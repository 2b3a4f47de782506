#include "remvc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>
#include <unordered_map>

#include "remvc/errors.hpp"

namespace remvc {

using nlohmann::json;

namespace {

bool valid_lonlat(double lon, double lat) {
  return std::isfinite(lon) && std::isfinite(lat) && lon >= -180.0 && lon <= 180.0 &&
         lat >= -90.0 && lat <= 90.0;
}

bool on_segment(const LonLat& a, const LonLat& b, double x, double y) {
  const double cross = (b.lon - a.lon) * (y - a.lat) - (b.lat - a.lat) * (x - a.lon);
  const double scale = std::max({std::abs(b.lon - a.lon), std::abs(b.lat - a.lat), 1.0});
  if (std::abs(cross) > 1e-12 * scale * scale) return false;
  return x >= std::min(a.lon, b.lon) && x <= std::max(a.lon, b.lon) && y >= std::min(a.lat, b.lat) &&
         y <= std::max(a.lat, b.lat);
}

bool contains(const RegionBoundary& b, double x, double y) {
  if (x < b.min.lon || x > b.max.lon || y < b.min.lat || y > b.max.lat) return false;
  const auto& r = b.ring;
  const std::size_t n = r.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (on_segment(r[j], r[i], x, y)) return true;
    if ((r[i].lat > y) != (r[j].lat > y)) {
      const double xcross = r[j].lon + (y - r[j].lat) * (r[i].lon - r[j].lon) / (r[i].lat - r[j].lat);
      if (x < xcross) inside = !inside;
    }
  }
  return inside;
}

double parse_double(const std::string& field, const std::string& what) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("cannot parse " + what + " '" + field + "'");
  return v;
}

long long parse_int(const std::string& field, const std::string& what) {
  const double v = parse_double(field, what);
  if (v != std::floor(v)) throw ParseError(what + " must be an integer: '" + field + "'");
  return static_cast<long long>(v);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

CsvTable read_csv(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (has_header && t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (has_header && t.header.empty()) throw ParseError(path + ": missing header line");
  return t;
}

std::size_t column(const CsvTable& t, const std::string& name, const std::string& path) {
  auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw ParseError(path + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - t.header.begin());
}

const std::string& field(const CsvTable& t, std::size_t r, std::size_t c, const std::string& path) {
  if (c >= t.rows[r].size())
    throw ParseError(path + ": line " + std::to_string(t.line_numbers[r]) + " has too few fields");
  return t.rows[r][c];
}

// Accepts either a header line or data from the first line on.
std::vector<std::pair<long long, double>> read_id_value_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  std::vector<std::pair<long long, double>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() < 2) throw ParseError(path + ": line " + std::to_string(lineno) + " needs 2 fields");
    if (lineno == 1 && !fields[0].empty() && !std::isdigit(static_cast<unsigned char>(fields[0][0])))
      continue;
    const std::string where = path + ": line " + std::to_string(lineno);
    out.emplace_back(parse_int(fields[0], where + " region_id"), parse_double(fields[1], where + " value"));
  }
  return out;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

ParsedRegions parse_regions(const json& fc) {
  if (!fc.is_object() || fc.value("type", "") != "FeatureCollection")
    throw ParseError("regions: expected a GeoJSON FeatureCollection");
  const auto& features = fc.contains("features") ? fc["features"] : json::array();
  if (!features.is_array() || features.empty()) throw ParseError("regions: no regions");

  ParsedRegions out;
  std::vector<LonLat> centroids;
  bool any_name = false;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    const std::string where = "regions: feature " + std::to_string(i);
    if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object())
      throw ParseError(where + ": missing geometry");
    const auto& g = f["geometry"];
    const std::string type = g.value("type", "");
    if (type != "Polygon") throw ParseError(where + ": unsupported geometry type '" + type + "'");
    if (!g.contains("coordinates") || !g["coordinates"].is_array() || g["coordinates"].empty())
      throw ParseError(where + ": polygon without rings");
    const auto& outer = g["coordinates"][0];
    RegionBoundary b;
    b.id = i;
    try {
      for (const auto& p : outer) {
        if (!p.is_array() || p.size() < 2) throw ParseError(where + ": malformed vertex");
        b.ring.push_back({p[0].get<double>(), p[1].get<double>()});
      }
    } catch (const json::exception&) {
      throw ParseError(where + ": malformed vertex");
    }
    if (b.ring.size() >= 2 && b.ring.front() == b.ring.back()) b.ring.pop_back();
    if (b.ring.size() < 3) throw ParseError(where + ": polygon needs at least 3 vertices");
    b.min = b.max = b.ring.front();
    LonLat c{};
    for (const auto& v : b.ring) {
      if (!valid_lonlat(v.lon, v.lat)) throw ParseError(where + ": coordinate out of range");
      b.min = {std::min(b.min.lon, v.lon), std::min(b.min.lat, v.lat)};
      b.max = {std::max(b.max.lon, v.lon), std::max(b.max.lat, v.lat)};
      c.lon += v.lon;
      c.lat += v.lat;
    }
    c.lon /= static_cast<double>(b.ring.size());
    c.lat /= static_cast<double>(b.ring.size());
    centroids.push_back(c);
    std::string name;
    if (f.contains("properties") && f["properties"].is_object() && f["properties"].contains("name") &&
        f["properties"]["name"].is_string()) {
      name = f["properties"]["name"].get<std::string>();
      any_name = true;
    }
    names.push_back(std::move(name));
    out.boundaries.push_back(std::move(b));
  }
  out.regions.count = out.boundaries.size();
  out.regions.centroids = std::move(centroids);
  if (any_name) out.regions.names = std::move(names);
  return out;
}

ParsedRegions parse_regions_file(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    return parse_regions(doc);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::optional<std::size_t> assign_point(const std::vector<RegionBoundary>& boundaries, double lon,
                                        double lat) {
  for (const auto& b : boundaries)
    if (contains(b, lon, lat)) return b.id;
  return std::nullopt;
}

int hour_of(const std::string& ts, int slices) {
  // YYYY-MM-DD[ T]HH:MM[:SS[.fff]]
  auto digits = [&](std::size_t pos, std::size_t n) -> int {
    if (pos + n > ts.size()) throw ParseError("unparseable timestamp '" + ts + "'");
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(ts[i]))) throw ParseError("unparseable timestamp '" + ts + "'");
      v = v * 10 + (ts[i] - '0');
    }
    return v;
  };
  if (ts.size() < 16 || ts[4] != '-' || ts[7] != '-' || (ts[10] != ' ' && ts[10] != 'T') || ts[13] != ':')
    throw ParseError("unparseable timestamp '" + ts + "'");
  const int month = digits(5, 2);
  const int day = digits(8, 2);
  digits(0, 4);
  const int hour = digits(11, 2);
  const int minute = digits(14, 2);
  if (ts.size() > 16) {
    if (ts[16] != ':') throw ParseError("unparseable timestamp '" + ts + "'");
    if (digits(17, 2) > 60) throw ParseError("unparseable timestamp '" + ts + "'");
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59)
    throw ParseError("timestamp out of range '" + ts + "'");
  if (slices <= 0) throw ConfigError("hour_of: slice count must be positive");
  return hour * slices / 24;
}

HeatmapBuild build_heatmaps(const std::vector<TripRecord>& trips,
                            const std::vector<RegionBoundary>& boundaries, std::size_t regions,
                            std::size_t hours, std::size_t threads) {
  auto run_chunk = [&](std::size_t begin, std::size_t end) {
    HeatmapBuild part;
    part.heatmaps = MobilityHeatmaps(hours, regions);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& t = trips[i];
      auto src = assign_point(boundaries, t.pickup_lon, t.pickup_lat);
      auto dst = assign_point(boundaries, t.dropoff_lon, t.dropoff_lat);
      if (!src || !dst || *src >= regions || *dst >= regions) {
        ++part.skipped;
        continue;
      }
      int h = 0;
      try {
        h = hour_of(t.pickup_time, static_cast<int>(hours));
      } catch (const ParseError&) {
        ++part.skipped;
        continue;
      }
      part.heatmaps.ms(*dst)[static_cast<std::size_t>(h) * regions + *src] += 1.0;
      part.heatmaps.md(*src)[static_cast<std::size_t>(h) * regions + *dst] += 1.0;
      ++part.accepted;
    }
    return part;
  };

  threads = std::max<std::size_t>(1, std::min(threads, trips.size() ? trips.size() : 1));
  if (threads == 1) return run_chunk(0, trips.size());

  std::vector<HeatmapBuild> parts(threads);
  std::vector<std::thread> pool;
  const std::size_t chunk = (trips.size() + threads - 1) / threads;
  for (std::size_t c = 0; c < threads; ++c) {
    const std::size_t b = std::min(trips.size(), c * chunk);
    const std::size_t e = std::min(trips.size(), b + chunk);
    pool.emplace_back([&, c, b, e] { parts[c] = run_chunk(b, e); });
  }
  for (auto& th : pool) th.join();
  HeatmapBuild out;
  out.heatmaps = MobilityHeatmaps(hours, regions);
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < out.heatmaps.ms_data.size(); ++i) {
      out.heatmaps.ms_data[i] += p.heatmaps.ms_data[i];
      out.heatmaps.md_data[i] += p.heatmaps.md_data[i];
    }
    out.accepted += p.accepted;
    out.skipped += p.skipped;
  }
  return out;
}

PoiBuild build_poi_counts(const std::vector<PoiRecord>& pois,
                          const std::vector<RegionBoundary>& boundaries, std::size_t regions,
                          const std::optional<std::vector<std::string>>& vocabulary) {
  std::vector<std::string> vocab;
  std::unordered_map<std::string, std::size_t> index;
  if (vocabulary) {
    vocab = *vocabulary;
    for (std::size_t c = 0; c < vocab.size(); ++c) index.emplace(vocab[c], c);
  } else {
    for (const auto& p : pois)
      if (!p.category.empty() && index.emplace(p.category, vocab.size()).second) vocab.push_back(p.category);
  }
  PoiBuild out;
  out.counts = PoiCounts(regions, vocab.size());
  out.counts.category_names = vocab;
  for (const auto& p : pois) {
    auto it = index.find(p.category);
    auto k = assign_point(boundaries, p.lon, p.lat);
    if (it == index.end() || !k || *k >= regions) {
      ++out.skipped;
      continue;
    }
    out.counts.at(*k, it->second) += 1;
    ++out.accepted;
  }
  return out;
}

std::vector<TripRecord> read_trips_csv(const std::string& path) {
  const auto t = read_csv(path, true);
  const auto c_time = column(t, "pickup_datetime", path);
  const auto c_plon = column(t, "pickup_longitude", path);
  const auto c_plat = column(t, "pickup_latitude", path);
  const auto c_dlon = column(t, "dropoff_longitude", path);
  const auto c_dlat = column(t, "dropoff_latitude", path);
  std::vector<TripRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string where = path + ": line " + std::to_string(t.line_numbers[r]);
    TripRecord rec;
    rec.pickup_time = field(t, r, c_time, path);
    rec.pickup_lon = parse_double(field(t, r, c_plon, path), where + " pickup_longitude");
    rec.pickup_lat = parse_double(field(t, r, c_plat, path), where + " pickup_latitude");
    rec.dropoff_lon = parse_double(field(t, r, c_dlon, path), where + " dropoff_longitude");
    rec.dropoff_lat = parse_double(field(t, r, c_dlat, path), where + " dropoff_latitude");
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<PoiRecord> read_pois_csv(const std::string& path) {
  const auto t = read_csv(path, true);
  const auto c_lon = column(t, "longitude", path);
  const auto c_lat = column(t, "latitude", path);
  const auto c_cat = column(t, "category", path);
  std::vector<PoiRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string where = path + ": line " + std::to_string(t.line_numbers[r]);
    PoiRecord rec;
    rec.lon = parse_double(field(t, r, c_lon, path), where + " longitude");
    rec.lat = parse_double(field(t, r, c_lat, path), where + " latitude");
    rec.category = field(t, r, c_cat, path);
    if (rec.category.empty()) throw ParseError(where + ": empty category");
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<double> load_popularity(const std::string& path, std::size_t regions) {
  std::vector<double> out(regions, 0.0);
  for (const auto& [id, value] : read_id_value_pairs(path)) {
    if (id < 0 || static_cast<std::size_t>(id) >= regions)
      throw ValidationError(path + ": region id " + std::to_string(id) + " out of range (L=" +
                            std::to_string(regions) + ")");
    if (!(value >= 0.0)) throw ValidationError(path + ": negative count for region " + std::to_string(id));
    out[static_cast<std::size_t>(id)] += value;
  }
  return out;
}

std::vector<int> load_labels(const std::string& path, std::size_t regions) {
  std::vector<int> out(regions, -1);
  for (const auto& [id, value] : read_id_value_pairs(path)) {
    if (id < 0 || static_cast<std::size_t>(id) >= regions)
      throw ValidationError(path + ": region id " + std::to_string(id) + " out of range");
    if (value != std::floor(value) || value < 0)
      throw ValidationError(path + ": label of region " + std::to_string(id) + " is not a class index");
    if (out[static_cast<std::size_t>(id)] != -1)
      throw ValidationError(path + ": duplicate label for region " + std::to_string(id));
    out[static_cast<std::size_t>(id)] = static_cast<int>(value);
  }
  for (std::size_t k = 0; k < regions; ++k)
    if (out[k] < 0) throw ValidationError(path + ": no label for region " + std::to_string(k));
  return out;
}

json to_json(const IngestReport& r) {
  return json{{"accepted_trips", r.accepted_trips},
              {"skipped_trips", r.skipped_trips},
              {"accepted_pois", r.accepted_pois},
              {"skipped_pois", r.skipped_pois}};
}

IngestResult ingest_files(const std::string& regions_path, const std::string& trips_path,
                          const std::string& pois_path,
                          const std::optional<std::string>& popularity_path, std::size_t hours,
                          std::size_t threads) {
  auto parsed = parse_regions_file(regions_path);
  const std::size_t L = parsed.regions.count;
  const auto trips = read_trips_csv(trips_path);
  const auto pois = read_pois_csv(pois_path);

  IngestResult out;
  auto hm = build_heatmaps(trips, parsed.boundaries, L, hours, threads);
  auto pc = build_poi_counts(pois, parsed.boundaries, L);
  if (pc.counts.categories == 0) throw ValidationError(pois_path + ": no POI categories found");
  out.dataset.regions = std::move(parsed.regions);
  out.dataset.heatmaps = std::move(hm.heatmaps);
  out.dataset.poi = std::move(pc.counts);
  if (popularity_path) out.dataset.popularity = load_popularity(*popularity_path, L);
  out.report = {hm.accepted, hm.skipped, pc.accepted, pc.skipped};
  return out;
}

}  // namespace remvc
