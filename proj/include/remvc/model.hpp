#pragma once

// Encoders, discriminators and contrastive objectives. Every loss is computed
// in log space and accumulates its analytic gradient into a parameter-shaped
// buffer; nothing here keeps state between calls.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "remvc/augment.hpp"
#include "remvc/core_types.hpp"
#include "remvc/numkit.hpp"

namespace remvc {

struct ModelConfig {
  std::size_t poi_width = 16;
  std::size_t mob_width = 16;
  std::vector<std::size_t> hidden{128};
  double temperature = 0.08;
  double alpha = 0.001;
  double beta = 1.0;
  std::size_t poi_negatives = 150;
  std::size_t mob_negatives = 10;
  std::size_t inter_negatives = 5;
  double poi_aug_p = 0.1;
  double mob_noise_sigma = 0.0001;
  bool normalize_intra = true;
  bool share_mobility_mlps = false;

  void check() const;
  bool operator==(const ModelConfig&) const = default;
};

enum class InterMode { classifier, inner_product };
enum class FuseStrategy { concat, average, max };

struct ReMvcParams {
  MlpParams poi_encoder;     // F -> poi_width
  MlpParams mob_encoder_ms;  // H*L -> mob_width
  MlpParams mob_encoder_md;  // H*L -> mob_width; unused when shared
  std::vector<double> inter_weight;  // poi_width + mob_width
  std::vector<double> inter_bias{0.0};
  // Autoencoder mode only.
  MlpParams poi_decoder;
  MlpParams mob_decoder_ms;
  MlpParams mob_decoder_md;

  std::vector<NamedTensor> tensors();
  std::vector<NamedConstTensor> tensors() const;
  bool has_decoders() const { return !poi_decoder.layers.empty(); }
  bool operator==(const ReMvcParams&) const = default;
};

ReMvcParams init_params(const ModelConfig& cfg, std::size_t categories, std::size_t heatmap_size,
                        Rng& rng, bool with_decoders = false);
ReMvcParams zeros_like(const ReMvcParams& like);

/// Normalized features of one region as seen by the encoders.
struct RegionInput {
  std::span<const double> poi;  // ratio vector
  std::span<const double> ms;   // normalized, flattened hour-major
  std::span<const double> md;
};

std::vector<double> encode_poi(const ReMvcParams& params, std::span<const double> f);

/// Takes raw heatmaps; each is normalized before the MLPs.
std::vector<double> encode_mobility(const ReMvcParams& params, std::span<const double> ms,
                                    std::span<const double> md, bool share_mlps);

std::vector<double> encode_mobility_normalized(const ReMvcParams& params, std::span<const double> ms,
                                               std::span<const double> md, bool share_mlps);

double log_d_intra(std::span<const double> a, std::span<const double> b, double temperature,
                   bool normalize);
double d_intra(std::span<const double> a, std::span<const double> b, double temperature, bool normalize);

/// w·[z_poi ‖ z_mob] + b, before the ReLU.
double inter_preactivation(const ReMvcParams& params, std::span<const double> z_poi,
                           std::span<const double> z_mob);
double log_d_inter(const ReMvcParams& params, std::span<const double> z_poi, std::span<const double> z_mob);
double d_inter(const ReMvcParams& params, std::span<const double> z_poi, std::span<const double> z_mob);

/// Inner-product inter-view score (the classifier-free ablation).
double inter_score_sim(std::span<const double> z_poi, std::span<const double> z_mob, double temperature,
                       bool normalize = true);

struct InfoNce {
  double loss = 0.0;
  std::vector<double> dlogits;
};

/// -logsumexp(logits[:positives]) + logsumexp(logits), as
/// log1p(sum_n exp(s_n - lse_pos)) so the value is never negative.
InfoNce info_nce(std::span<const double> logits, std::size_t positives);

/// The per-region intra-view POI term. Positives and negatives are ratio
/// vectors run through the same encoder. Adds weight * gradient into grads
/// when given.
double loss_poi(const ReMvcParams& params, std::span<const double> anchor,
                std::span<const std::vector<double>> positives,
                std::span<const std::vector<double>> negatives, const ModelConfig& cfg,
                ReMvcParams* grads = nullptr, double weight = 1.0);

/// The per-region intra-view mobility term over normalized heatmap pairs.
double loss_mob(const ReMvcParams& params, const HeatmapPair& anchor,
                std::span<const HeatmapPair> positives, std::span<const HeatmapPair> negatives,
                const ModelConfig& cfg, ReMvcParams* grads = nullptr, double weight = 1.0);

/// The per-region inter-view term. Negative pairs are (poi of anchor, mob of
/// n) and (poi of n, mob of anchor) for each negative region n. Gradients
/// reach both encoders and, in classifier mode, the discriminator.
double loss_inter(const ReMvcParams& params, const RegionInput& anchor,
                  std::span<const RegionInput> negatives, const ModelConfig& cfg,
                  InterMode mode = InterMode::classifier, ReMvcParams* grads = nullptr,
                  double weight = 1.0);

/// Mean squared reconstruction error of the ratio vector through the POI
/// encoder and its mirrored decoder.
double loss_mse_poi(const ReMvcParams& params, std::span<const double> f, ReMvcParams* grads = nullptr,
                    double weight = 1.0);

/// Mean squared reconstruction error of normalized MS||MD from the mobility
/// embedding (one decoder per heatmap).
double loss_mse_mob(const ReMvcParams& params, std::span<const double> ms, std::span<const double> md,
                    const ModelConfig& cfg, ReMvcParams* grads = nullptr, double weight = 1.0);

struct LossParts {
  std::optional<double> mob;
  std::optional<double> poi;
  std::optional<double> inter;
};

/// mob + alpha * poi + beta * inter over the present parts.
double loss_total(const LossParts& parts, double alpha, double beta);

std::vector<double> fuse(std::span<const double> z_poi, std::span<const double> z_mob, FuseStrategy strategy);

struct EmbeddingViews {
  bool poi = true;
  bool mob = true;
};

/// Row k is the fusion of region k's two view embeddings.
EmbeddingMatrix final_embedding(const ReMvcParams& params, const Dataset& dataset, const ModelConfig& cfg,
                                EmbeddingViews views = {}, FuseStrategy strategy = FuseStrategy::concat);

nlohmann::json to_json(const ModelConfig& cfg);
void update_from_json(ModelConfig& cfg, const nlohmann::json& doc);

}  // namespace remvc
