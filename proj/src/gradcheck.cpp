#include "remvc/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "remvc/augment.hpp"
#include "remvc/errors.hpp"
#include "remvc/rng.hpp"
#include "remvc/sampler.hpp"

namespace remvc {

const char* loss_name(CheckedLoss loss) {
  switch (loss) {
    case CheckedLoss::poi: return "poi";
    case CheckedLoss::mob: return "mob";
    case CheckedLoss::inter: return "inter";
    case CheckedLoss::mse: return "mse";
    case CheckedLoss::joint: return "joint";
    case CheckedLoss::inter_sim: return "inter_sim";
  }
  return "?";
}

Dataset toy_dataset(std::uint64_t seed, std::size_t regions, std::size_t categories, std::size_t hours) {
  Rng rng = substream(seed, "toy-dataset");
  std::uniform_int_distribution<int> count(0, 6);
  Dataset d;
  d.regions.count = regions;
  d.poi = PoiCounts(regions, categories);
  for (auto& v : d.poi.data) v = count(rng);
  d.poi.at(0, 0) += 1;  // anchor region never empty
  d.heatmaps = MobilityHeatmaps(hours, regions);
  for (auto& v : d.heatmaps.ms_data) v = count(rng);
  for (auto& v : d.heatmaps.md_data) v = count(rng);
  return d;
}

ModelConfig toy_model_config() {
  ModelConfig c;
  c.poi_width = 4;
  c.mob_width = 4;
  c.hidden = {8};
  c.poi_negatives = 3;
  c.mob_negatives = 3;
  c.inter_negatives = 3;
  return c;
}

std::vector<double> flatten(const ReMvcParams& params) {
  std::vector<double> out;
  for (const auto& t : params.tensors()) out.insert(out.end(), t.values.begin(), t.values.end());
  return out;
}

void unflatten(std::span<const double> flat, ReMvcParams& params) {
  std::size_t pos = 0;
  for (auto& t : params.tensors()) {
    if (pos + t.values.size() > flat.size()) throw ShapeError("unflatten: vector too short");
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
              flat.begin() + static_cast<std::ptrdiff_t>(pos + t.values.size()), t.values.begin());
    pos += t.values.size();
  }
  if (pos != flat.size()) throw ShapeError("unflatten: vector too long");
}

GradcheckResult gradcheck(CheckedLoss loss, std::uint64_t seed, double h, bool corrupt) {
  const Dataset d = toy_dataset(seed);
  const std::size_t L = d.size();
  ModelConfig cfg = toy_model_config();
  Rng init = substream(seed, "toy-init");
  const bool mse = loss == CheckedLoss::mse;
  ReMvcParams params = init_params(cfg, d.poi.categories, d.heatmaps.block(), init, mse);

  const FeatureTable features = FeatureTable::from_dataset(d);
  std::vector<std::vector<double>> ratios(L);
  std::vector<HeatmapPair> heat(L);
  const std::size_t block = d.heatmaps.block();
  for (std::size_t k = 0; k < L; ++k) {
    auto r = features.poi.row(k);
    ratios[k].assign(r.begin(), r.end());
    auto m = features.mobility.row(k);
    heat[k].ms.assign(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(block));
    heat[k].md.assign(m.begin() + static_cast<std::ptrdiff_t>(block), m.end());
  }
  const std::size_t anchor = 0;
  Rng aug = substream(seed, "toy-aug");
  auto poi_set = positive_set_poi(d.poi.row(anchor), 0.3, aug);
  const std::vector<std::vector<double>> poi_pos(poi_set.begin(), poi_set.end());
  const auto mob_pos = positive_set_mob(heat[anchor].ms, heat[anchor].md, 0.01, aug);
  std::vector<std::vector<double>> poi_neg;
  std::vector<HeatmapPair> mob_neg;
  std::vector<RegionInput> inter_neg;
  for (std::size_t k = 1; k < L; ++k) {
    poi_neg.push_back(ratios[k]);
    mob_neg.push_back(heat[k]);
    inter_neg.push_back({ratios[k], heat[k].ms, heat[k].md});
  }
  const RegionInput anchor_in{ratios[anchor], heat[anchor].ms, heat[anchor].md};

  // Put the discriminator bias between the middle pre-activations so some
  // pairs sit on each side of the ReLU. With every pair active the loss is
  // invariant to encoder output shifts and those gradients are exactly 0.
  {
    std::vector<double> pre;
    std::vector<std::vector<double>> zps(L), zms(L);
    for (std::size_t k = 0; k < L; ++k) {
      zps[k] = encode_poi(params, ratios[k]);
      zms[k] = encode_mobility_normalized(params, heat[k].ms, heat[k].md, cfg.share_mobility_mlps);
    }
    params.inter_bias[0] = 0.0;
    pre.push_back(inter_preactivation(params, zps[0], zms[0]));
    for (std::size_t k = 1; k < L; ++k) {
      pre.push_back(inter_preactivation(params, zps[0], zms[k]));
      pre.push_back(inter_preactivation(params, zps[k], zms[0]));
    }
    std::sort(pre.begin(), pre.end());
    const std::size_t mid = pre.size() / 2;
    params.inter_bias[0] = -0.5 * (pre[mid - 1] + pre[mid]);
  }

  auto evaluate = [&](const ReMvcParams& p, ReMvcParams* g) -> double {
    switch (loss) {
      case CheckedLoss::poi: return loss_poi(p, ratios[anchor], poi_pos, poi_neg, cfg, g);
      case CheckedLoss::mob: return loss_mob(p, heat[anchor], mob_pos, mob_neg, cfg, g);
      case CheckedLoss::inter: return loss_inter(p, anchor_in, inter_neg, cfg, InterMode::classifier, g);
      case CheckedLoss::inter_sim: return loss_inter(p, anchor_in, inter_neg, cfg, InterMode::inner_product, g);
      case CheckedLoss::mse:
        return loss_mse_poi(p, ratios[anchor], g) + loss_mse_mob(p, heat[anchor].ms, heat[anchor].md, cfg, g);
      case CheckedLoss::joint: {
        LossParts parts;
        parts.poi = loss_poi(p, ratios[anchor], poi_pos, poi_neg, cfg, g, cfg.alpha);
        parts.mob = loss_mob(p, heat[anchor], mob_pos, mob_neg, cfg, g, 1.0);
        parts.inter = loss_inter(p, anchor_in, inter_neg, cfg, InterMode::classifier, g, cfg.beta);
        return loss_total(parts, cfg.alpha, cfg.beta);
      }
    }
    return 0.0;
  };

  ReMvcParams grads = zeros_like(params);
  evaluate(params, &grads);
  std::vector<double> analytic = flatten(grads);
  if (corrupt && !analytic.empty()) {
    const auto it = std::max_element(analytic.begin(), analytic.end(),
                                     [](double a, double b) { return std::abs(a) < std::abs(b); });
    *it += 1e-3 * std::max(1.0, std::abs(*it));
  }

  ReMvcParams scratch = params;
  const auto numeric = finite_diff_grad(
      [&](std::span<const double> theta) {
        unflatten(theta, scratch);
        return evaluate(scratch, nullptr);
      },
      flatten(params), h);

  GradcheckResult r;
  r.loss = loss_name(loss);
  r.parameters = analytic.size();
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
    const double err = std::abs(analytic[i] - numeric[i]) / denom;
    if (err > r.max_rel_error) {
      r.max_rel_error = err;
      r.worst_index = i;
    }
  }
  std::size_t pos = 0;
  for (const auto& t : params.tensors()) {
    if (r.worst_index < pos + t.values.size()) {
      r.worst_tensor = t.name;
      break;
    }
    pos += t.values.size();
  }
  return r;
}

std::vector<GradcheckResult> gradcheck_suite(std::uint64_t seed, std::size_t configs, bool corrupt) {
  std::vector<GradcheckResult> out;
  for (auto loss : {CheckedLoss::poi, CheckedLoss::mob, CheckedLoss::inter, CheckedLoss::mse}) {
    GradcheckResult worst;
    worst.loss = loss_name(loss);
    for (std::size_t c = 0; c < configs; ++c) {
      auto r = gradcheck(loss, mix64(seed + c), 1e-5, corrupt && c == 0);
      if (c == 0 || r.max_rel_error > worst.max_rel_error) worst = r;
    }
    out.push_back(worst);
  }
  return out;
}

}  // namespace remvc
