#include "remvc/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "remvc/errors.hpp"

namespace remvc {

using nlohmann::json;

std::vector<double> poi_ratios(std::span<const std::int64_t> row) {
  std::int64_t total = 0;
  for (auto c : row) total += c;
  std::vector<double> out(row.size(), 0.0);
  if (total <= 0) return out;
  for (std::size_t c = 0; c < row.size(); ++c)
    out[c] = static_cast<double>(row[c]) / static_cast<double>(total);
  return out;
}

std::vector<double> poi_ratios(const PoiCounts& counts, std::size_t region) {
  if (region >= counts.regions)
    throw IndexError("poi_ratios: region " + std::to_string(region) + " out of range (L=" +
                     std::to_string(counts.regions) + ")");
  return poi_ratios(counts.row(region));
}

std::vector<double> normalize_heatmap(std::span<const double> m) {
  double total = 0.0;
  for (double v : m) {
    if (v < 0.0) throw ValidationError("normalize_heatmap: negative entry");
    total += v;
  }
  std::vector<double> out(m.begin(), m.end());
  if (total == 0.0) return out;
  for (auto& v : out) v /= total;
  return out;
}

std::vector<std::string> validate(const Dataset& d) {
  std::vector<std::string> issues;
  const std::size_t n = d.regions.count;
  if (n < 2) issues.push_back("region count must be at least 2, got " + std::to_string(n));
  if (!d.regions.names.empty() && d.regions.names.size() != n)
    issues.push_back("region names length mismatch");
  if (d.regions.centroids) {
    const auto& cs = *d.regions.centroids;
    if (cs.size() != n) issues.push_back("centroids length mismatch");
    for (std::size_t k = 0; k < cs.size(); ++k) {
      if (!(cs[k].lon >= -180.0 && cs[k].lon <= 180.0) || !(cs[k].lat >= -90.0 && cs[k].lat <= 90.0))
        issues.push_back("centroid out of range at region " + std::to_string(k));
    }
  }

  if (d.poi.regions != n) issues.push_back("poi counts region count mismatch");
  if (d.poi.categories < 1) issues.push_back("poi counts need at least one category");
  if (d.poi.data.size() != d.poi.regions * d.poi.categories)
    issues.push_back("poi counts storage size mismatch");
  if (!d.poi.category_names.empty() && d.poi.category_names.size() != d.poi.categories)
    issues.push_back("poi category names length mismatch");
  for (std::size_t i = 0; i < d.poi.data.size(); ++i)
    if (d.poi.data[i] < 0)
      issues.push_back("negative poi count at region " + std::to_string(i / d.poi.categories) +
                       " category " + std::to_string(i % d.poi.categories));

  const auto& hm = d.heatmaps;
  if (hm.regions != n) issues.push_back("heatmap region count mismatch");
  if (hm.hours < 1) issues.push_back("heatmaps need at least one time slice");
  const std::size_t expect = hm.regions * hm.hours * hm.regions;
  if (hm.ms_data.size() != expect || hm.md_data.size() != expect) {
    issues.push_back("heatmap storage size mismatch");
  } else {
    auto scan = [&](const std::vector<double>& data, const char* which) {
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double v = data[i];
        if (!std::isfinite(v) || v < 0.0 || v != std::floor(v)) {
          const std::size_t k = i / hm.block();
          const std::size_t rem = i % hm.block();
          std::ostringstream msg;
          msg << (v < 0.0 ? "negative" : "non-integer") << " heatmap count at " << which
              << " region " << k << " hour " << rem / hm.regions << " column "
              << rem % hm.regions;
          issues.push_back(msg.str());
        }
      }
    };
    scan(hm.ms_data, "MS");
    scan(hm.md_data, "MD");
  }

  if (d.labels) {
    const auto& labels = *d.labels;
    if (labels.size() != n) {
      issues.push_back("labels length mismatch");
    } else {
      int max_label = -1;
      bool negative = false;
      for (int l : labels) {
        negative |= l < 0;
        max_label = std::max(max_label, l);
      }
      if (negative) {
        issues.push_back("negative label");
      } else {
        std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
        for (int l : labels) seen[static_cast<std::size_t>(l)] = true;
        for (std::size_t c = 0; c < seen.size(); ++c)
          if (!seen[c]) {
            issues.push_back("labels are not dense: class " + std::to_string(c) + " missing");
            break;
          }
      }
    }
  }
  if (d.popularity) {
    if (d.popularity->size() != n) issues.push_back("popularity length mismatch");
    for (std::size_t k = 0; k < d.popularity->size(); ++k)
      if (!((*d.popularity)[k] >= 0.0) || !std::isfinite((*d.popularity)[k]))
        issues.push_back("invalid popularity at region " + std::to_string(k));
  }
  return issues;
}

namespace {

json heatmap_json(const MobilityHeatmaps& hm, bool source) {
  json all = json::array();
  for (std::size_t k = 0; k < hm.regions; ++k) {
    auto block = source ? hm.ms(k) : hm.md(k);
    json rows = json::array();
    for (std::size_t h = 0; h < hm.hours; ++h)
      rows.push_back(std::vector<double>(block.begin() + h * hm.regions,
                                         block.begin() + (h + 1) * hm.regions));
    all.push_back(std::move(rows));
  }
  return all;
}

void read_heatmap(const json& j, MobilityHeatmaps& hm, bool source) {
  if (!j.is_array() || j.size() != hm.regions)
    throw ParseError(std::string("dataset: ") + (source ? "ms" : "md") + " must have L blocks");
  for (std::size_t k = 0; k < hm.regions; ++k) {
    const auto& rows = j[k];
    if (!rows.is_array() || rows.size() != hm.hours)
      throw ParseError("dataset: heatmap block " + std::to_string(k) + " must have H rows");
    auto block = source ? hm.ms(k) : hm.md(k);
    for (std::size_t h = 0; h < hm.hours; ++h) {
      const auto& row = rows[h];
      if (!row.is_array() || row.size() != hm.regions)
        throw ParseError("dataset: heatmap row of region " + std::to_string(k) +
                         " must have L entries");
      for (std::size_t c = 0; c < hm.regions; ++c) block[h * hm.regions + c] = row[c].get<double>();
    }
  }
}

}  // namespace

json to_json(const Dataset& d) {
  json doc;
  doc["format"] = "remvc-dataset";
  doc["version"] = kDatasetFormatVersion;
  doc["L"] = d.regions.count;
  doc["F"] = d.poi.categories;
  doc["H"] = d.heatmaps.hours;
  if (!d.regions.names.empty()) doc["region_names"] = d.regions.names;
  if (d.regions.centroids) {
    json cs = json::array();
    for (const auto& c : *d.regions.centroids) cs.push_back({c.lon, c.lat});
    doc["centroids"] = std::move(cs);
  }
  doc["poi_categories"] = d.poi.category_names;
  json counts = json::array();
  for (std::size_t k = 0; k < d.poi.regions; ++k) {
    auto row = d.poi.row(k);
    counts.push_back(std::vector<std::int64_t>(row.begin(), row.end()));
  }
  doc["poi_counts"] = std::move(counts);
  doc["ms"] = heatmap_json(d.heatmaps, true);
  doc["md"] = heatmap_json(d.heatmaps, false);
  if (d.labels) doc["labels"] = *d.labels;
  if (d.popularity) doc["popularity"] = *d.popularity;
  return doc;
}

Dataset dataset_from_json(const json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", "") != "remvc-dataset")
      throw ParseError("dataset: not a remvc-dataset document");
    const int version = doc.at("version").get<int>();
    if (version != kDatasetFormatVersion)
      throw ParseError("dataset: unsupported version " + std::to_string(version));
    Dataset d;
    const auto L = doc.at("L").get<std::size_t>();
    const auto F = doc.at("F").get<std::size_t>();
    const auto H = doc.at("H").get<std::size_t>();
    d.regions.count = L;
    if (doc.contains("region_names")) d.regions.names = doc["region_names"].get<std::vector<std::string>>();
    if (doc.contains("centroids")) {
      std::vector<LonLat> cs;
      for (const auto& c : doc["centroids"]) cs.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
      d.regions.centroids = std::move(cs);
    }
    d.poi = PoiCounts(L, F);
    d.poi.category_names = doc.at("poi_categories").get<std::vector<std::string>>();
    const auto& counts = doc.at("poi_counts");
    if (!counts.is_array() || counts.size() != L) throw ParseError("dataset: poi_counts must have L rows");
    for (std::size_t k = 0; k < L; ++k) {
      if (!counts[k].is_array() || counts[k].size() != F)
        throw ParseError("dataset: poi_counts row " + std::to_string(k) + " must have F entries");
      for (std::size_t c = 0; c < F; ++c) d.poi.at(k, c) = counts[k][c].get<std::int64_t>();
    }
    d.heatmaps = MobilityHeatmaps(H, L);
    read_heatmap(doc.at("ms"), d.heatmaps, true);
    read_heatmap(doc.at("md"), d.heatmaps, false);
    if (doc.contains("labels")) d.labels = doc["labels"].get<std::vector<int>>();
    if (doc.contains("popularity")) d.popularity = doc["popularity"].get<std::vector<double>>();
    return d;
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset: ") + e.what());
  }
}

std::string serialize(const Dataset& d) { return to_json(d).dump(); }

Dataset load_dataset(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return dataset_from_json(doc);
}

void save_dataset(const Dataset& d, const std::string& path) { write_file_atomic(path, serialize(d)); }

std::string fingerprint(const Dataset& d) {
  const std::string bytes = serialize(d);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out << contents;
    out.flush();
    if (!out) throw Error("failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot move " + tmp + " to " + path + ": " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_embeddings_csv(const Dense& embeddings) {
  std::string out = "region_id";
  for (std::size_t c = 0; c < embeddings.cols; ++c) out += ",e_" + std::to_string(c);
  out += '\n';
  char buf[32];
  for (std::size_t r = 0; r < embeddings.rows; ++r) {
    out += std::to_string(r);
    for (std::size_t c = 0; c < embeddings.cols; ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", embeddings(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Dense parse_embeddings_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("region_id", 0) != 0)
    throw ParseError("embeddings CSV: missing region_id header");
  const std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != cols + 1)
      throw ParseError("embeddings CSV row " + std::to_string(rows + 1) + ": expected " +
                       std::to_string(cols + 1) + " fields");
    if (cells[0] != std::to_string(rows))
      throw ParseError("embeddings CSV row " + std::to_string(rows + 1) + ": region ids must be 0..L-1 in order");
    for (std::size_t c = 1; c < cells.size(); ++c) {
      char* end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str() || *end != '\0')
        throw ParseError("embeddings CSV row " + std::to_string(rows + 1) + ": bad number '" + cells[c] + "'");
      values.push_back(v);
    }
    ++rows;
  }
  Dense out(rows, cols);
  std::copy(values.begin(), values.end(), out.data.begin());
  return out;
}

}  // namespace remvc
