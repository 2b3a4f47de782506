#pragma once

// Multi-task training loop, checkpoints and the ablation suite.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "remvc/eval.hpp"
#include "remvc/model.hpp"
#include "remvc/sampler.hpp"

namespace remvc {

enum class IntraMode { contrastive, mse_autoencoder };
enum class CategoryPriorKind { uniform, empirical };

struct TrainConfig {
  ModelConfig model;
  double lr = 0.001;
  std::size_t max_epochs = 100;
  // Stop once the joint loss improved by less than this fraction per epoch,
  // averaged over the last convergence_window epochs.
  double convergence_tol = 1e-4;
  std::size_t convergence_window = 10;
  std::uint64_t seed = 42;
  bool use_poi = true;
  bool use_mob = true;
  bool use_inter = true;
  IntraMode intra_mode = IntraMode::contrastive;
  InterMode inter_mode = InterMode::classifier;
  NegativeStrategy negative_strategy = NegativeStrategy::feature_distance;
  DistanceMetric distance_metric = DistanceMetric::euclidean;
  bool cross_view_aug = false;
  std::size_t cross_view_k = 3;
  CategoryPriorKind category_prior = CategoryPriorKind::uniform;

  void check() const;
  /// The inter-view term needs both views.
  bool inter_active() const { return use_inter && use_poi && use_mob; }
  EmbeddingViews views() const { return {use_poi, use_mob}; }
};

nlohmann::json to_json(const TrainConfig& cfg);
/// Missing keys keep defaults; unknown keys throw ConfigError.
TrainConfig train_config_from_json(const nlohmann::json& doc);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::optional<double> mob;
  std::optional<double> poi;
  std::optional<double> inter;
  double total = 0.0;
};

using History = std::vector<EpochRecord>;

nlohmann::json to_json(const EpochRecord& r);
/// "epoch i L_mob=... L_poi=... L_inter=... L=..." (disabled parts omitted).
std::string format_epoch(const EpochRecord& r);

struct TrainResult {
  ReMvcParams params;
  ReMvcParams initial;
  History history;
  bool converged = false;
};

using EpochCallback = std::function<void(const EpochRecord&)>;
using WarningCallback = std::function<void(const std::string&)>;

/// Batch size one: every step is one region from a seeded shuffle, followed
/// by one Adam update on the joint loss.
TrainResult train(const Dataset& dataset, const TrainConfig& cfg, const EpochCallback& on_epoch = {},
                  const WarningCallback& on_warning = {});

/// K regions closest to `region` in the other view's feature space (POI
/// distance for view == mobility and vice versa), ties to the lower id.
std::vector<std::size_t> cross_view_positives(const FeatureTable& features, std::size_t region,
                                              std::size_t k, View view);

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  int version = kCheckpointFormatVersion;
  TrainConfig config;
  ReMvcParams params;
  History history;
  std::string dataset_fingerprint;
  std::size_t regions = 0;
  std::size_t categories = 0;
  std::size_t hours = 0;
};

nlohmann::json to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);
std::string serialize(const Checkpoint& ckpt);

Checkpoint make_checkpoint(const TrainResult& result, const TrainConfig& cfg, const Dataset& dataset);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Warning text if the checkpoint was trained on a different dataset.
std::optional<std::string> fingerprint_warning(const Checkpoint& ckpt, const Dataset& dataset);

/// Embeddings of `dataset` under a checkpoint; views follow its config.
EmbeddingMatrix embed(const Checkpoint& ckpt, const Dataset& dataset);

struct EvalOptions {
  std::optional<std::size_t> k;  // default: number of label classes, else 29
  std::size_t folds = 5;
  double penalty = 0.1;
  std::uint64_t seed = 42;
};

struct AblationRow {
  std::string name;
  std::optional<EvalReport> clustering;
  std::optional<EvalReport> popularity;
  std::size_t embedding_width = 0;
  std::size_t epochs = 0;
  nlohmann::json extra = nlohmann::json::object();
};

inline const std::vector<std::string>& ablation_variant_names() {
  static const std::vector<std::string> names{"full", "no_poi", "no_mob", "no_iv", "mse",
                                              "sim",  "es",     "rs",     "ca",    "fuse_avg_max"};
  return names;
}

/// Apply the named variant's switches on top of a base config.
TrainConfig variant_config(const TrainConfig& base, const std::string& name);

std::pair<std::optional<EvalReport>, std::optional<EvalReport>> evaluate_embeddings(
    const Dense& embeddings, const Dataset& dataset, const EvalOptions& opts);

/// Trains each variant (the fuse row reuses the full model) and evaluates.
/// Variants may train on up to `threads` threads; rows come back in
/// ablation_variant_names() order regardless.
std::vector<AblationRow> run_ablation_suite(const Dataset& dataset, const TrainConfig& base,
                                            const EvalOptions& opts, std::size_t threads = 1,
                                            const std::vector<std::string>& only = {});

nlohmann::json to_json(const std::vector<AblationRow>& rows);

}  // namespace remvc
