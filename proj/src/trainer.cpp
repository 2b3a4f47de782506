#include "remvc/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "remvc/errors.hpp"
#include "remvc/rng.hpp"

namespace remvc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

void TrainConfig::check() const {
  model.check();
  if (!(lr > 0.0)) throw ConfigError("train: lr must be > 0");
  if (max_epochs == 0) throw ConfigError("train: max_epochs must be positive");
  if (!use_poi && !use_mob) throw ConfigError("train: at least one of use_poi / use_mob must be on");
  if (inter_active() && inter_mode == InterMode::inner_product && model.poi_width != model.mob_width)
    throw ConfigError("train: inner-product inter mode needs poi_width == mob_width");
  if (cross_view_aug && cross_view_k == 0) throw ConfigError("train: cross_view_k must be positive");
  if (convergence_window == 0) throw ConfigError("train: convergence_window must be positive");
}

namespace {

template <typename E>
struct EnumNames {
  std::vector<std::pair<E, const char*>> items;

  const char* name(E e) const {
    for (const auto& [v, n] : items)
      if (v == e) return n;
    return "?";
  }
  E parse(const std::string& s, const char* key) const {
    for (const auto& [v, n] : items)
      if (s == n) return v;
    throw ConfigError(std::string("train config: invalid value '") + s + "' for " + key);
  }
};

const EnumNames<IntraMode> kIntraModes{{{IntraMode::contrastive, "contrastive"},
                                        {IntraMode::mse_autoencoder, "mse_autoencoder"}}};
const EnumNames<InterMode> kInterModes{{{InterMode::classifier, "classifier"},
                                        {InterMode::inner_product, "inner_product"}}};
const EnumNames<NegativeStrategy> kStrategies{{{NegativeStrategy::feature_distance, "feature_distance"},
                                               {NegativeStrategy::euclidean, "euclidean"},
                                               {NegativeStrategy::uniform, "uniform"}}};
const EnumNames<DistanceMetric> kMetrics{{{DistanceMetric::euclidean, "euclidean"},
                                          {DistanceMetric::cosine, "cosine"}}};
const EnumNames<CategoryPriorKind> kPriors{{{CategoryPriorKind::uniform, "uniform"},
                                            {CategoryPriorKind::empirical, "empirical"}}};

}  // namespace

json to_json(const TrainConfig& c) {
  return json{{"model", to_json(c.model)},
              {"lr", c.lr},
              {"max_epochs", c.max_epochs},
              {"convergence_tol", c.convergence_tol},
              {"convergence_window", c.convergence_window},
              {"seed", c.seed},
              {"use_poi", c.use_poi},
              {"use_mob", c.use_mob},
              {"use_inter", c.use_inter},
              {"intra_mode", kIntraModes.name(c.intra_mode)},
              {"inter_mode", kInterModes.name(c.inter_mode)},
              {"negative_strategy", kStrategies.name(c.negative_strategy)},
              {"distance_metric", kMetrics.name(c.distance_metric)},
              {"cross_view_aug", c.cross_view_aug ? "top_k" : "off"},
              {"cross_view_k", c.cross_view_k},
              {"category_prior", kPriors.name(c.category_prior)}};
}

TrainConfig train_config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("train config must be a JSON object");
  static const std::set<std::string> known{"model",      "lr",         "max_epochs",        "convergence_tol",
                                           "convergence_window", "seed", "use_poi",         "use_mob",
                                           "use_inter",  "intra_mode", "inter_mode",        "negative_strategy",
                                           "distance_metric", "cross_view_aug", "cross_view_k", "category_prior"};
  for (const auto& [key, _] : doc.items())
    if (!known.count(key)) throw ConfigError("train config: unknown key '" + key + "'");
  TrainConfig c;
  try {
    if (doc.contains("model")) update_from_json(c.model, doc["model"]);
    c.lr = doc.value("lr", c.lr);
    c.max_epochs = doc.value("max_epochs", c.max_epochs);
    c.convergence_tol = doc.value("convergence_tol", c.convergence_tol);
    c.convergence_window = doc.value("convergence_window", c.convergence_window);
    c.seed = doc.value("seed", c.seed);
    c.use_poi = doc.value("use_poi", c.use_poi);
    c.use_mob = doc.value("use_mob", c.use_mob);
    c.use_inter = doc.value("use_inter", c.use_inter);
    if (doc.contains("intra_mode")) c.intra_mode = kIntraModes.parse(doc["intra_mode"].get<std::string>(), "intra_mode");
    if (doc.contains("inter_mode")) c.inter_mode = kInterModes.parse(doc["inter_mode"].get<std::string>(), "inter_mode");
    if (doc.contains("negative_strategy"))
      c.negative_strategy = kStrategies.parse(doc["negative_strategy"].get<std::string>(), "negative_strategy");
    if (doc.contains("distance_metric"))
      c.distance_metric = kMetrics.parse(doc["distance_metric"].get<std::string>(), "distance_metric");
    if (doc.contains("cross_view_aug")) {
      const auto v = doc["cross_view_aug"].get<std::string>();
      if (v != "off" && v != "top_k") throw ConfigError("train config: cross_view_aug must be 'off' or 'top_k'");
      c.cross_view_aug = v == "top_k";
    }
    c.cross_view_k = doc.value("cross_view_k", c.cross_view_k);
    if (doc.contains("category_prior"))
      c.category_prior = kPriors.parse(doc["category_prior"].get<std::string>(), "category_prior");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.check();
  return c;
}

json to_json(const EpochRecord& r) {
  json j{{"epoch", r.epoch}, {"L", r.total}};
  if (r.mob) j["L_mob"] = *r.mob;
  if (r.poi) j["L_poi"] = *r.poi;
  if (r.inter) j["L_inter"] = *r.inter;
  return j;
}

std::string format_epoch(const EpochRecord& r) {
  std::ostringstream s;
  s.precision(6);
  s << "epoch " << r.epoch;
  if (r.mob) s << " L_mob=" << *r.mob;
  if (r.poi) s << " L_poi=" << *r.poi;
  if (r.inter) s << " L_inter=" << *r.inter;
  s << " L=" << r.total;
  return s.str();
}

// ---------------------------------------------------------------------------
// Training

std::vector<std::size_t> cross_view_positives(const FeatureTable& features, std::size_t region, std::size_t k,
                                              View view) {
  const std::size_t L = features.poi.rows;
  if (region >= L) throw IndexError("cross_view_positives: region out of range");
  if (k > L - 1)
    throw RequestError("cross_view_positives: K=" + std::to_string(k) + " exceeds " + std::to_string(L - 1) +
                       " other regions");
  const Dense& space = view == View::mobility ? features.poi : features.mobility;
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t n = 0; n < L; ++n)
    if (n != region) dist.emplace_back(feature_distance(space.row(region), space.row(n), DistanceMetric::euclidean), n);
  std::sort(dist.begin(), dist.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(dist[i].second);
  return out;
}

namespace {

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

bool tensor_active(const std::string& name, const TrainConfig& cfg) {
  const bool mse = cfg.intra_mode == IntraMode::mse_autoencoder;
  if (starts_with(name, "poi_encoder")) return cfg.use_poi;
  if (starts_with(name, "mob_encoder_ms")) return cfg.use_mob;
  if (starts_with(name, "mob_encoder_md")) return cfg.use_mob && !cfg.model.share_mobility_mlps;
  if (starts_with(name, "inter.")) return cfg.inter_active() && cfg.inter_mode == InterMode::classifier;
  if (starts_with(name, "poi_decoder")) return mse && cfg.use_poi;
  if (starts_with(name, "mob_decoder")) return mse && cfg.use_mob;
  return false;
}

std::size_t clamp_negatives(std::size_t want, std::size_t available, const char* what, const WarningCallback& warn) {
  if (want <= available) return want;
  if (warn)
    warn(std::string(what) + " negative size " + std::to_string(want) + " exceeds " + std::to_string(available) +
         " candidates; clamped");
  return available;
}

}  // namespace

TrainResult train(const Dataset& dataset, const TrainConfig& cfg, const EpochCallback& on_epoch,
                  const WarningCallback& on_warning) {
  cfg.check();
  if (auto issues = validate(dataset); !issues.empty())
    throw ValidationError("train: invalid dataset: " + issues.front());
  const std::size_t L = dataset.size();
  const std::size_t F = dataset.poi.categories;
  const auto& mc = cfg.model;
  const bool mse = cfg.intra_mode == IntraMode::mse_autoencoder;

  const FeatureTable features = FeatureTable::from_dataset(dataset);
  std::vector<std::vector<double>> ratios(L);
  std::vector<HeatmapPair> heat(L);
  const std::size_t block = dataset.heatmaps.block();
  for (std::size_t k = 0; k < L; ++k) {
    auto r = features.poi.row(k);
    ratios[k].assign(r.begin(), r.end());
    auto m = features.mobility.row(k);
    heat[k].ms.assign(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(block));
    heat[k].md.assign(m.begin() + static_cast<std::ptrdiff_t>(block), m.end());
  }

  std::vector<double> prior;
  if (cfg.category_prior == CategoryPriorKind::empirical) {
    prior.assign(F, 0.0);
    for (std::size_t k = 0; k < L; ++k)
      for (std::size_t c = 0; c < F; ++c) prior[c] += static_cast<double>(dataset.poi.at(k, c));
    if (std::accumulate(prior.begin(), prior.end(), 0.0) == 0.0) prior.clear();
  }

  std::optional<NegativeSampler> poi_sampler, mob_sampler;
  std::size_t n_poi = 0, n_mob = 0, n_inter = 0;
  if (cfg.use_poi && !mse) {
    poi_sampler.emplace(features, View::poi, cfg.negative_strategy, cfg.distance_metric);
    n_poi = clamp_negatives(mc.poi_negatives, L - 1, "POI", on_warning);
  }
  if (cfg.use_mob && !mse) {
    mob_sampler.emplace(features, View::mobility, cfg.negative_strategy, cfg.distance_metric);
    n_mob = clamp_negatives(mc.mob_negatives, L - 1, "mobility", on_warning);
  }
  if (cfg.inter_active()) n_inter = clamp_negatives(mc.inter_negatives, L - 1, "inter-view", on_warning);

  std::vector<std::vector<std::size_t>> ca_poi(L), ca_mob(L);
  if (cfg.cross_view_aug && !mse) {
    const std::size_t k = clamp_negatives(cfg.cross_view_k, L - 1, "cross-view positive", on_warning);
    for (std::size_t r = 0; r < L; ++r) {
      if (cfg.use_poi) ca_poi[r] = cross_view_positives(features, r, k, View::poi);
      if (cfg.use_mob) ca_mob[r] = cross_view_positives(features, r, k, View::mobility);
    }
  }

  TrainResult result;
  {
    Rng init = substream(cfg.seed, "init");
    result.params = init_params(mc, F, block, init, mse);
  }
  result.initial = result.params;
  ReMvcParams grads = zeros_like(result.params);

  std::vector<NamedTensor> active_params;
  std::vector<NamedConstTensor> active_grads;
  {
    auto all_p = result.params.tensors();
    auto all_g = grads.tensors();
    for (std::size_t i = 0; i < all_p.size(); ++i) {
      if (!tensor_active(all_p[i].name, cfg)) continue;
      active_params.push_back(all_p[i]);
      active_grads.push_back({all_g[i].name, all_g[i].values});
    }
  }
  std::vector<std::span<double>> grad_buffers;
  for (auto& t : grads.tensors())
    if (tensor_active(t.name, cfg)) grad_buffers.push_back(t.values);

  AdamState adam;
  std::vector<std::size_t> order(L);
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng shuffle = substream(cfg.seed, "shuffle", epoch);
    std::shuffle(order.begin(), order.end(), shuffle);
    double sum_mob = 0.0, sum_poi = 0.0, sum_inter = 0.0, sum_total = 0.0;

    for (std::size_t region : order) {
      for (auto buf : grad_buffers) std::fill(buf.begin(), buf.end(), 0.0);
      LossParts parts;
      const auto& params = result.params;

      if (cfg.use_poi) {
        if (mse) {
          parts.poi = loss_mse_poi(params, ratios[region], &grads, mc.alpha);
        } else {
          Rng aug = substream(cfg.seed, "poi-aug", step);
          Rng neg = substream(cfg.seed, "poi-neg", step);
          auto set = positive_set_poi(dataset.poi.row(region), mc.poi_aug_p, aug, prior);
          std::vector<std::vector<double>> positives(set.begin(), set.end());
          for (auto j : ca_poi[region]) positives.push_back(ratios[j]);
          std::vector<std::vector<double>> negatives;
          for (auto j : poi_sampler->sample(region, n_poi, neg)) negatives.push_back(ratios[j]);
          parts.poi = loss_poi(params, ratios[region], positives, negatives, mc, &grads, mc.alpha);
        }
      }
      if (cfg.use_mob) {
        if (mse) {
          parts.mob = loss_mse_mob(params, heat[region].ms, heat[region].md, mc, &grads, 1.0);
        } else {
          Rng aug = substream(cfg.seed, "mob-aug", step);
          Rng neg = substream(cfg.seed, "mob-neg", step);
          auto positives = positive_set_mob(heat[region].ms, heat[region].md, mc.mob_noise_sigma, aug);
          for (auto j : ca_mob[region]) positives.push_back(heat[j]);
          std::vector<HeatmapPair> negatives;
          for (auto j : mob_sampler->sample(region, n_mob, neg)) negatives.push_back(heat[j]);
          parts.mob = loss_mob(params, heat[region], positives, negatives, mc, &grads, 1.0);
        }
      }
      if (cfg.inter_active()) {
        Rng neg = substream(cfg.seed, "inter-neg", step);
        auto input = [&](std::size_t j) { return RegionInput{ratios[j], heat[j].ms, heat[j].md}; };
        std::vector<RegionInput> negatives;
        for (auto j : sample_inter_negatives(region, L, n_inter, neg)) negatives.push_back(input(j));
        parts.inter = loss_inter(params, input(region), negatives, mc, cfg.inter_mode, &grads, mc.beta);
      }

      double total = 0.0;
      try {
        total = loss_total(parts, mc.alpha, mc.beta);
        adam_step(active_params, active_grads, adam, cfg.lr);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", region " + std::to_string(region) + ": " + e.what());
      }
      sum_mob += parts.mob.value_or(0.0);
      sum_poi += parts.poi.value_or(0.0);
      sum_inter += parts.inter.value_or(0.0);
      sum_total += total;
      ++step;
    }

    const double n = static_cast<double>(L);
    EpochRecord rec;
    rec.epoch = epoch;
    if (cfg.use_mob) rec.mob = sum_mob / n;
    if (cfg.use_poi) rec.poi = sum_poi / n;
    if (cfg.inter_active()) rec.inter = sum_inter / n;
    rec.total = sum_total / n;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const std::size_t w = cfg.convergence_window;
    if (result.history.size() > w) {
      const double before = result.history[result.history.size() - 1 - w].total;
      const double now = rec.total;
      const double rel = (before - now) / (static_cast<double>(w) * std::max(std::abs(before), 1e-12));
      if (rel < cfg.convergence_tol) {
        result.converged = true;
        break;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

const char* activation_name(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

json mlp_json(const MlpParams& p) {
  json layers = json::array();
  for (const auto& layer : p.layers)
    layers.push_back(json{{"rows", layer.weight.rows},
                          {"cols", layer.weight.cols},
                          {"activation", activation_name(layer.activation)},
                          {"weight", layer.weight.data},
                          {"bias", layer.bias}});
  return layers;
}

MlpParams mlp_from_json(const json& j, const std::string& what) {
  MlpParams p;
  if (!j.is_array()) throw ParseError("checkpoint: " + what + " must be an array of layers");
  for (const auto& l : j) {
    Layer layer;
    layer.weight.rows = l.at("rows").get<std::size_t>();
    layer.weight.cols = l.at("cols").get<std::size_t>();
    layer.weight.data = l.at("weight").get<std::vector<double>>();
    layer.bias = l.at("bias").get<std::vector<double>>();
    const auto act = l.at("activation").get<std::string>();
    if (act != "relu" && act != "identity") throw ParseError("checkpoint: unknown activation '" + act + "'");
    layer.activation = act == "relu" ? Activation::relu : Activation::identity;
    p.layers.push_back(std::move(layer));
  }
  return p;
}

void check_mlp(const MlpParams& p, std::size_t in, std::size_t out, const std::string& what) {
  try {
    check_chain(p);
  } catch (const ShapeError& e) {
    throw ParseError("checkpoint: " + what + ": " + e.what());
  }
  if (p.in() != in || p.out() != out)
    throw ParseError("checkpoint: " + what + " has shape " + std::to_string(p.in()) + "->" + std::to_string(p.out()) +
                     ", expected " + std::to_string(in) + "->" + std::to_string(out));
}

}  // namespace

json to_json(const Checkpoint& c) {
  json params{{"poi_encoder", mlp_json(c.params.poi_encoder)},
              {"mob_encoder_ms", mlp_json(c.params.mob_encoder_ms)},
              {"mob_encoder_md", mlp_json(c.params.mob_encoder_md)},
              {"inter_weight", c.params.inter_weight},
              {"inter_bias", c.params.inter_bias}};
  if (c.params.has_decoders()) {
    params["poi_decoder"] = mlp_json(c.params.poi_decoder);
    params["mob_decoder_ms"] = mlp_json(c.params.mob_decoder_ms);
    params["mob_decoder_md"] = mlp_json(c.params.mob_decoder_md);
  }
  json history = json::array();
  for (const auto& r : c.history) history.push_back(to_json(r));
  return json{{"format", "remvc-checkpoint"},
              {"version", c.version},
              {"config", to_json(c.config)},
              {"dims", {{"L", c.regions}, {"F", c.categories}, {"H", c.hours}}},
              {"params", std::move(params)},
              {"history", std::move(history)},
              {"dataset_fingerprint", c.dataset_fingerprint}};
}

Checkpoint checkpoint_from_json(const json& doc) {
  Checkpoint c;
  try {
    if (!doc.is_object() || doc.value("format", "") != "remvc-checkpoint")
      throw ParseError("checkpoint: not a remvc-checkpoint document");
    c.version = doc.at("version").get<int>();
    if (c.version != kCheckpointFormatVersion)
      throw ParseError("checkpoint: unsupported version " + std::to_string(c.version));
    c.config = train_config_from_json(doc.at("config"));
    const auto& dims = doc.at("dims");
    c.regions = dims.at("L").get<std::size_t>();
    c.categories = dims.at("F").get<std::size_t>();
    c.hours = dims.at("H").get<std::size_t>();
    const auto& p = doc.at("params");
    c.params.poi_encoder = mlp_from_json(p.at("poi_encoder"), "poi_encoder");
    c.params.mob_encoder_ms = mlp_from_json(p.at("mob_encoder_ms"), "mob_encoder_ms");
    c.params.mob_encoder_md = mlp_from_json(p.at("mob_encoder_md"), "mob_encoder_md");
    c.params.inter_weight = p.at("inter_weight").get<std::vector<double>>();
    c.params.inter_bias = p.at("inter_bias").get<std::vector<double>>();
    if (p.contains("poi_decoder")) {
      c.params.poi_decoder = mlp_from_json(p.at("poi_decoder"), "poi_decoder");
      c.params.mob_decoder_ms = mlp_from_json(p.at("mob_decoder_ms"), "mob_decoder_ms");
      c.params.mob_decoder_md = mlp_from_json(p.at("mob_decoder_md"), "mob_decoder_md");
    }
    for (const auto& r : doc.at("history")) {
      EpochRecord rec;
      rec.epoch = r.at("epoch").get<std::size_t>();
      rec.total = r.at("L").get<double>();
      if (r.contains("L_mob")) rec.mob = r["L_mob"].get<double>();
      if (r.contains("L_poi")) rec.poi = r["L_poi"].get<double>();
      if (r.contains("L_inter")) rec.inter = r["L_inter"].get<double>();
      c.history.push_back(rec);
    }
    c.dataset_fingerprint = doc.at("dataset_fingerprint").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }

  const auto& mc = c.config.model;
  const std::size_t block = c.hours * c.regions;
  check_mlp(c.params.poi_encoder, c.categories, mc.poi_width, "poi_encoder");
  check_mlp(c.params.mob_encoder_ms, block, mc.mob_width, "mob_encoder_ms");
  check_mlp(c.params.mob_encoder_md, block, mc.mob_width, "mob_encoder_md");
  if (c.params.inter_weight.size() != mc.poi_width + mc.mob_width || c.params.inter_bias.size() != 1)
    throw ParseError("checkpoint: inter discriminator shape mismatch");
  if (c.params.has_decoders()) {
    check_mlp(c.params.poi_decoder, mc.poi_width, c.categories, "poi_decoder");
    check_mlp(c.params.mob_decoder_ms, mc.mob_width, block, "mob_decoder_ms");
    check_mlp(c.params.mob_decoder_md, mc.mob_width, block, "mob_decoder_md");
  }
  for (const auto& t : std::as_const(c.params).tensors())
    for (double v : t.values)
      if (!std::isfinite(v)) throw ParseError("checkpoint: non-finite value in " + t.name);
  return c;
}

std::string serialize(const Checkpoint& c) { return to_json(c).dump(); }

Checkpoint make_checkpoint(const TrainResult& result, const TrainConfig& cfg, const Dataset& dataset) {
  Checkpoint c;
  c.config = cfg;
  c.params = result.params;
  c.history = result.history;
  c.dataset_fingerprint = fingerprint(dataset);
  c.regions = dataset.size();
  c.categories = dataset.poi.categories;
  c.hours = dataset.heatmaps.hours;
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) { write_file_atomic(path, serialize(c)); }

Checkpoint load_checkpoint(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return checkpoint_from_json(doc);
}

std::optional<std::string> fingerprint_warning(const Checkpoint& c, const Dataset& dataset) {
  const auto fp = fingerprint(dataset);
  if (fp == c.dataset_fingerprint) return std::nullopt;
  return "checkpoint was trained on dataset " + c.dataset_fingerprint + ", embedding dataset " + fp;
}

EmbeddingMatrix embed(const Checkpoint& c, const Dataset& dataset) {
  if (dataset.poi.categories != c.categories)
    throw ShapeError("checkpoint expects F=" + std::to_string(c.categories) + ", dataset has F=" +
                     std::to_string(dataset.poi.categories));
  if (dataset.heatmaps.block() != c.hours * c.regions)
    throw ShapeError("checkpoint expects H*L=" + std::to_string(c.hours * c.regions) + ", dataset has " +
                     std::to_string(dataset.heatmaps.block()));
  return final_embedding(c.params, dataset, c.config.model, c.config.views());
}

// ---------------------------------------------------------------------------
// Ablations

TrainConfig variant_config(const TrainConfig& base, const std::string& name) {
  TrainConfig c = base;
  if (name == "full" || name == "fuse_avg_max") return c;
  if (name == "no_poi") c.use_poi = false;
  else if (name == "no_mob") c.use_mob = false;
  else if (name == "no_iv") c.use_inter = false;
  else if (name == "mse") c.intra_mode = IntraMode::mse_autoencoder;
  else if (name == "sim") c.inter_mode = InterMode::inner_product;
  else if (name == "es") c.negative_strategy = NegativeStrategy::euclidean;
  else if (name == "rs") c.negative_strategy = NegativeStrategy::uniform;
  else if (name == "ca") {
    c.cross_view_aug = true;
    c.cross_view_k = 3;
  } else {
    throw ConfigError("unknown ablation variant '" + name + "'");
  }
  return c;
}

std::pair<std::optional<EvalReport>, std::optional<EvalReport>> evaluate_embeddings(const Dense& e,
                                                                                    const Dataset& d,
                                                                                    const EvalOptions& o) {
  std::pair<std::optional<EvalReport>, std::optional<EvalReport>> out;
  if (d.labels) {
    std::size_t k = 29;
    if (o.k) {
      k = *o.k;
    } else {
      k = static_cast<std::size_t>(*std::max_element(d.labels->begin(), d.labels->end())) + 1;
    }
    out.first = evaluate_clustering(e, *d.labels, k, o.seed);
  }
  if (d.popularity) out.second = cross_validate_popularity(e, *d.popularity, o.folds, o.seed, o.penalty);
  return out;
}

std::vector<AblationRow> run_ablation_suite(const Dataset& dataset, const TrainConfig& base, const EvalOptions& opts,
                                            std::size_t threads, const std::vector<std::string>& only) {
  if (!dataset.labels && !dataset.popularity)
    throw RequestError("ablation suite needs labels and/or popularity");
  const auto& all = ablation_variant_names();
  std::vector<std::string> wanted = only.empty() ? all : only;
  for (const auto& w : wanted)
    if (std::find(all.begin(), all.end(), w) == all.end()) throw ConfigError("unknown ablation variant '" + w + "'");
  for (const auto& w : wanted) variant_config(base, w).check();

  // The fuse row needs the full model's parameters.
  std::vector<std::string> to_train;
  for (const auto& name : all) {
    const bool requested = std::find(wanted.begin(), wanted.end(), name) != wanted.end();
    const bool needed_for_fuse = name == "full" &&
                                 std::find(wanted.begin(), wanted.end(), "fuse_avg_max") != wanted.end();
    if (name != "fuse_avg_max" && (requested || needed_for_fuse)) to_train.push_back(name);
  }

  std::vector<std::optional<TrainResult>> trained(to_train.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= to_train.size()) return;
      try {
        trained[i] = train(dataset, variant_config(base, to_train[i]));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, to_train.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  auto result_of = [&](const std::string& name) -> const TrainResult& {
    const auto it = std::find(to_train.begin(), to_train.end(), name);
    return *trained[static_cast<std::size_t>(it - to_train.begin())];
  };

  std::vector<AblationRow> rows;
  for (const auto& name : all) {
    if (std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    AblationRow row;
    row.name = name;
    if (name == "fuse_avg_max") {
      const auto& full = result_of("full");
      const auto avg = final_embedding(full.params, dataset, base.model, base.views(), FuseStrategy::average);
      const auto mx = final_embedding(full.params, dataset, base.model, base.views(), FuseStrategy::max);
      std::tie(row.clustering, row.popularity) = evaluate_embeddings(avg.values, dataset, opts);
      auto [mc, mp] = evaluate_embeddings(mx.values, dataset, opts);
      row.embedding_width = avg.values.cols;
      row.epochs = full.history.size();
      row.extra["average"] = "reported metrics use elementwise average fusion";
      if (mc) row.extra["max"]["clustering"] = to_json(*mc);
      if (mp) row.extra["max"]["popularity"] = to_json(*mp);
    } else {
      const auto cfg = variant_config(base, name);
      const auto& r = result_of(name);
      const auto e = final_embedding(r.params, dataset, cfg.model, cfg.views());
      std::tie(row.clustering, row.popularity) = evaluate_embeddings(e.values, dataset, opts);
      row.embedding_width = e.values.cols;
      row.epochs = r.history.size();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const std::vector<AblationRow>& rows) {
  json table = json::object();
  for (const auto& r : rows) {
    json j{{"embedding_width", r.embedding_width}, {"epochs", r.epochs}};
    if (r.clustering) j["clustering"] = to_json(*r.clustering);
    if (r.popularity) j["popularity"] = to_json(*r.popularity);
    if (!r.extra.empty()) j["extra"] = r.extra;
    table[r.name] = std::move(j);
  }
  return table;
}

}  // namespace remvc
