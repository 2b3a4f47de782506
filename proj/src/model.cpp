#include "remvc/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "remvc/errors.hpp"

namespace remvc {

using nlohmann::json;

void ModelConfig::check() const {
  if (!(temperature > 0.0)) throw ConfigError("model: temperature must be > 0");
  if (poi_width == 0 || mob_width == 0) throw ConfigError("model: embedding widths must be positive");
  for (auto h : hidden)
    if (h == 0) throw ConfigError("model: hidden widths must be positive");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("model: alpha and beta must be >= 0");
  if (poi_negatives == 0 || mob_negatives == 0 || inter_negatives == 0)
    throw ConfigError("model: negative sizes must be positive");
  if (!(poi_aug_p >= 0.0 && poi_aug_p <= 1.0)) throw ConfigError("model: poi_aug_p must be in [0,1]");
  if (!(mob_noise_sigma >= 0.0)) throw ConfigError("model: mob_noise_sigma must be >= 0");
}

// ---------------------------------------------------------------------------
// Parameters

std::vector<NamedTensor> ReMvcParams::tensors() {
  std::vector<NamedTensor> out;
  append_tensors(poi_encoder, "poi_encoder", out);
  append_tensors(mob_encoder_ms, "mob_encoder_ms", out);
  append_tensors(mob_encoder_md, "mob_encoder_md", out);
  out.push_back({"inter.weight", inter_weight});
  out.push_back({"inter.bias", inter_bias});
  append_tensors(poi_decoder, "poi_decoder", out);
  append_tensors(mob_decoder_ms, "mob_decoder_ms", out);
  append_tensors(mob_decoder_md, "mob_decoder_md", out);
  return out;
}

std::vector<NamedConstTensor> ReMvcParams::tensors() const {
  std::vector<NamedConstTensor> out;
  append_tensors(poi_encoder, "poi_encoder", out);
  append_tensors(mob_encoder_ms, "mob_encoder_ms", out);
  append_tensors(mob_encoder_md, "mob_encoder_md", out);
  out.push_back({"inter.weight", inter_weight});
  out.push_back({"inter.bias", inter_bias});
  append_tensors(poi_decoder, "poi_decoder", out);
  append_tensors(mob_decoder_ms, "mob_decoder_ms", out);
  append_tensors(mob_decoder_md, "mob_decoder_md", out);
  return out;
}

namespace {

std::vector<std::size_t> widths(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

std::vector<std::size_t> reversed_hidden(const std::vector<std::size_t>& hidden) {
  return {hidden.rbegin(), hidden.rend()};
}

}  // namespace

ReMvcParams init_params(const ModelConfig& cfg, std::size_t categories, std::size_t heatmap_size,
                        Rng& rng, bool with_decoders) {
  cfg.check();
  ReMvcParams p;
  p.poi_encoder = make_mlp(widths(categories, cfg.hidden, cfg.poi_width), rng);
  p.mob_encoder_ms = make_mlp(widths(heatmap_size, cfg.hidden, cfg.mob_width), rng);
  p.mob_encoder_md = make_mlp(widths(heatmap_size, cfg.hidden, cfg.mob_width), rng);
  Dense w = glorot_init(1, cfg.poi_width + cfg.mob_width, rng);
  p.inter_weight = std::move(w.data);
  p.inter_bias = {0.0};
  if (with_decoders) {
    const auto rev = reversed_hidden(cfg.hidden);
    p.poi_decoder = make_mlp(widths(cfg.poi_width, rev, categories), rng);
    p.mob_decoder_ms = make_mlp(widths(cfg.mob_width, rev, heatmap_size), rng);
    p.mob_decoder_md = make_mlp(widths(cfg.mob_width, rev, heatmap_size), rng);
  }
  return p;
}

ReMvcParams zeros_like(const ReMvcParams& like) {
  ReMvcParams z = like;
  for (auto& t : z.tensors()) std::fill(t.values.begin(), t.values.end(), 0.0);
  return z;
}

// ---------------------------------------------------------------------------
// Encoders

namespace {

struct MobPass {
  MlpOutput ms;
  MlpOutput md;
  std::vector<double> z;
};

const MlpParams& md_encoder(const ReMvcParams& p, bool share) { return share ? p.mob_encoder_ms : p.mob_encoder_md; }
MlpParams& md_encoder(ReMvcParams& p, bool share) { return share ? p.mob_encoder_ms : p.mob_encoder_md; }

MobPass mob_forward(const ReMvcParams& p, std::span<const double> ms, std::span<const double> md, bool share) {
  MobPass pass{mlp_forward(p.mob_encoder_ms, ms), mlp_forward(md_encoder(p, share), md), {}};
  pass.z.resize(pass.ms.y.size());
  for (std::size_t i = 0; i < pass.z.size(); ++i) pass.z[i] = 0.5 * (pass.ms.y[i] + pass.md.y[i]);
  return pass;
}

void mob_backward(const ReMvcParams& p, const MobPass& pass, std::span<const double> dz, ReMvcParams& g,
                  double weight, bool share) {
  std::vector<double> half(dz.begin(), dz.end());
  for (auto& v : half) v *= 0.5;
  mlp_backward_into(p.mob_encoder_ms, pass.ms.tape, half, g.mob_encoder_ms, weight, false);
  mlp_backward_into(md_encoder(p, share), pass.md.tape, half, md_encoder(g, share), weight, false);
}

void check_width(std::span<const double> x, std::size_t expect, const char* what) {
  if (x.size() != expect)
    throw ShapeError(std::string(what) + ": width " + std::to_string(x.size()) + " != " + std::to_string(expect));
}

}  // namespace

std::vector<double> encode_poi(const ReMvcParams& params, std::span<const double> f) {
  check_width(f, params.poi_encoder.in(), "encode_poi");
  return mlp_forward(params.poi_encoder, f).y;
}

std::vector<double> encode_mobility_normalized(const ReMvcParams& params, std::span<const double> ms,
                                               std::span<const double> md, bool share_mlps) {
  check_width(ms, params.mob_encoder_ms.in(), "encode_mobility (MS)");
  check_width(md, params.mob_encoder_ms.in(), "encode_mobility (MD)");
  return mob_forward(params, ms, md, share_mlps).z;
}

std::vector<double> encode_mobility(const ReMvcParams& params, std::span<const double> ms,
                                    std::span<const double> md, bool share_mlps) {
  const auto ms_n = normalize_heatmap(ms);
  const auto md_n = normalize_heatmap(md);
  return encode_mobility_normalized(params, ms_n, md_n, share_mlps);
}

// ---------------------------------------------------------------------------
// Discriminators

namespace {

// L2 normalization with its reverse pass. Zero vectors (and raw mode) pass
// through untouched.
struct Unit {
  std::vector<double> u;
  double norm = 1.0;
  bool scaled = false;
};

Unit to_unit(std::span<const double> z, bool normalize) {
  Unit out{{z.begin(), z.end()}, 1.0, false};
  if (!normalize) return out;
  const double n = std::sqrt(dot(z, z));
  if (n == 0.0) return out;
  for (auto& v : out.u) v /= n;
  out.norm = n;
  out.scaled = true;
  return out;
}

void unit_backward(const Unit& unit, std::vector<double>& g) {
  if (!unit.scaled) return;
  const double ug = dot(unit.u, g);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (g[i] - unit.u[i] * ug) / unit.norm;
}

}  // namespace

double log_d_intra(std::span<const double> a, std::span<const double> b, double temperature, bool normalize) {
  if (a.size() != b.size()) throw ShapeError("d_intra: length mismatch");
  const auto ua = to_unit(a, normalize);
  const auto ub = to_unit(b, normalize);
  return dot(ua.u, ub.u) / temperature;
}

double d_intra(std::span<const double> a, std::span<const double> b, double temperature, bool normalize) {
  return std::exp(log_d_intra(a, b, temperature, normalize));
}

double inter_preactivation(const ReMvcParams& params, std::span<const double> z_poi,
                           std::span<const double> z_mob) {
  if (z_poi.size() + z_mob.size() != params.inter_weight.size())
    throw ShapeError("d_inter: embedding widths do not match the discriminator");
  const std::span<const double> w(params.inter_weight);
  return dot(w.first(z_poi.size()), z_poi) + dot(w.subspan(z_poi.size()), z_mob) + params.inter_bias[0];
}

double log_d_inter(const ReMvcParams& params, std::span<const double> z_poi, std::span<const double> z_mob) {
  const double a = inter_preactivation(params, z_poi, z_mob);
  return a > 0.0 ? a : 0.0;
}

double d_inter(const ReMvcParams& params, std::span<const double> z_poi, std::span<const double> z_mob) {
  return std::exp(log_d_inter(params, z_poi, z_mob));
}

double inter_score_sim(std::span<const double> z_poi, std::span<const double> z_mob, double temperature,
                       bool normalize) {
  if (z_poi.size() != z_mob.size())
    throw ConfigError("inner-product inter score needs equal view widths");
  return d_intra(z_poi, z_mob, temperature, normalize);
}

InfoNce info_nce(std::span<const double> logits, std::size_t positives) {
  if (positives == 0 || positives > logits.size()) throw RequestError("info_nce: need at least one positive");
  double mpos = logits[0];
  for (std::size_t i = 1; i < positives; ++i) mpos = std::max(mpos, logits[i]);
  double spos = 0.0;
  for (std::size_t i = 0; i < positives; ++i) spos += std::exp(logits[i] - mpos);
  const double lse_pos = mpos + std::log(spos);
  double r = 0.0;
  for (std::size_t i = positives; i < logits.size(); ++i) r += std::exp(logits[i] - lse_pos);
  InfoNce out;
  out.loss = std::log1p(r);
  const double lse_all = lse_pos + out.loss;
  out.dlogits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p_all = std::exp(logits[i] - lse_all);
    out.dlogits[i] = i < positives ? p_all - std::exp(logits[i] - lse_pos) : p_all;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Losses

namespace {

struct IntraTerm {
  double loss = 0.0;
  std::vector<double> d_anchor;
  std::vector<std::vector<double>> d_others;
};

// others = positives followed by negatives.
IntraTerm intra_term(std::span<const double> anchor, const std::vector<const std::vector<double>*>& others,
                     std::size_t positives, double temperature, bool normalize) {
  const Unit ua = to_unit(anchor, normalize);
  std::vector<Unit> uo;
  uo.reserve(others.size());
  std::vector<double> logits(others.size());
  for (std::size_t j = 0; j < others.size(); ++j) {
    if (others[j]->size() != anchor.size()) throw ShapeError("intra loss: embedding width mismatch");
    uo.push_back(to_unit(*others[j], normalize));
    logits[j] = dot(ua.u, uo[j].u) / temperature;
  }
  const InfoNce nce = info_nce(logits, positives);
  IntraTerm out;
  out.loss = nce.loss;
  out.d_anchor.assign(anchor.size(), 0.0);
  out.d_others.resize(others.size());
  for (std::size_t j = 0; j < others.size(); ++j) {
    const double g = nce.dlogits[j] / temperature;
    out.d_others[j].resize(anchor.size());
    for (std::size_t i = 0; i < anchor.size(); ++i) {
      out.d_anchor[i] += g * uo[j].u[i];
      out.d_others[j][i] = g * ua.u[i];
    }
    unit_backward(uo[j], out.d_others[j]);
  }
  unit_backward(ua, out.d_anchor);
  return out;
}

}  // namespace

double loss_poi(const ReMvcParams& params, std::span<const double> anchor,
                std::span<const std::vector<double>> positives,
                std::span<const std::vector<double>> negatives, const ModelConfig& cfg, ReMvcParams* grads,
                double weight) {
  check_width(anchor, params.poi_encoder.in(), "loss_poi");
  const MlpOutput a = mlp_forward(params.poi_encoder, anchor);
  std::vector<MlpOutput> passes;
  passes.reserve(positives.size() + negatives.size());
  for (const auto& f : positives) passes.push_back(mlp_forward(params.poi_encoder, f));
  for (const auto& f : negatives) passes.push_back(mlp_forward(params.poi_encoder, f));
  std::vector<const std::vector<double>*> zs;
  for (const auto& p : passes) zs.push_back(&p.y);
  const IntraTerm term = intra_term(a.y, zs, positives.size(), cfg.temperature, cfg.normalize_intra);
  if (grads) {
    mlp_backward_into(params.poi_encoder, a.tape, term.d_anchor, grads->poi_encoder, weight, false);
    for (std::size_t j = 0; j < passes.size(); ++j)
      mlp_backward_into(params.poi_encoder, passes[j].tape, term.d_others[j], grads->poi_encoder, weight, false);
  }
  return term.loss;
}

double loss_mob(const ReMvcParams& params, const HeatmapPair& anchor, std::span<const HeatmapPair> positives,
                std::span<const HeatmapPair> negatives, const ModelConfig& cfg, ReMvcParams* grads,
                double weight) {
  const bool share = cfg.share_mobility_mlps;
  check_width(anchor.ms, params.mob_encoder_ms.in(), "loss_mob (MS)");
  check_width(anchor.md, params.mob_encoder_ms.in(), "loss_mob (MD)");
  const MobPass a = mob_forward(params, anchor.ms, anchor.md, share);
  std::vector<MobPass> passes;
  passes.reserve(positives.size() + negatives.size());
  for (const auto& h : positives) passes.push_back(mob_forward(params, h.ms, h.md, share));
  for (const auto& h : negatives) passes.push_back(mob_forward(params, h.ms, h.md, share));
  std::vector<const std::vector<double>*> zs;
  for (const auto& p : passes) zs.push_back(&p.z);
  const IntraTerm term = intra_term(a.z, zs, positives.size(), cfg.temperature, cfg.normalize_intra);
  if (grads) {
    mob_backward(params, a, term.d_anchor, *grads, weight, share);
    for (std::size_t j = 0; j < passes.size(); ++j)
      mob_backward(params, passes[j], term.d_others[j], *grads, weight, share);
  }
  return term.loss;
}

double loss_inter(const ReMvcParams& params, const RegionInput& anchor, std::span<const RegionInput> negatives,
                  const ModelConfig& cfg, InterMode mode, ReMvcParams* grads, double weight) {
  const bool share = cfg.share_mobility_mlps;
  const std::size_t dp = params.poi_encoder.out();
  const std::size_t dm = params.mob_encoder_ms.out();
  if (mode == InterMode::inner_product && dp != dm)
    throw ConfigError("inner-product inter score needs equal view widths");
  if (mode == InterMode::classifier && params.inter_weight.size() != dp + dm)
    throw ShapeError("loss_inter: discriminator width mismatch");

  // Encodings: index 0 is the anchor, 1..N the negatives.
  std::vector<MlpOutput> poi;
  std::vector<MobPass> mob;
  poi.push_back(mlp_forward(params.poi_encoder, anchor.poi));
  mob.push_back(mob_forward(params, anchor.ms, anchor.md, share));
  for (const auto& n : negatives) {
    poi.push_back(mlp_forward(params.poi_encoder, n.poi));
    mob.push_back(mob_forward(params, n.ms, n.md, share));
  }

  // Pairs: (0,0) positive, then (0,n) and (n,0).
  std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 0}};
  for (std::size_t n = 1; n <= negatives.size(); ++n) pairs.emplace_back(0, n);
  for (std::size_t n = 1; n <= negatives.size(); ++n) pairs.emplace_back(n, 0);

  std::span<const double> w_poi, w_mob;
  if (mode == InterMode::classifier) {
    w_poi = std::span<const double>(params.inter_weight).first(dp);
    w_mob = std::span<const double>(params.inter_weight).subspan(dp);
  }
  std::vector<double> logits(pairs.size());
  std::vector<double> pre(pairs.size());
  std::vector<Unit> up, um;
  if (mode == InterMode::inner_product) {
    for (const auto& p : poi) up.push_back(to_unit(p.y, cfg.normalize_intra));
    for (const auto& m : mob) um.push_back(to_unit(m.z, cfg.normalize_intra));
  }
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    if (mode == InterMode::classifier) {
      pre[q] = dot(w_poi, poi[i].y) + dot(w_mob, mob[j].z) + params.inter_bias[0];
      logits[q] = pre[q] > 0.0 ? pre[q] : 0.0;
    } else {
      logits[q] = dot(up[i].u, um[j].u) / cfg.temperature;
    }
  }
  const InfoNce nce = info_nce(logits, 1);
  if (!grads) return nce.loss;

  std::vector<std::vector<double>> dzp(poi.size(), std::vector<double>(dp, 0.0));
  std::vector<std::vector<double>> dzm(mob.size(), std::vector<double>(dm, 0.0));
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    if (mode == InterMode::classifier) {
      if (!(pre[q] > 0.0)) continue;
      const double g = nce.dlogits[q];
      for (std::size_t c = 0; c < dp; ++c) {
        dzp[i][c] += g * w_poi[c];
        grads->inter_weight[c] += weight * g * poi[i].y[c];
      }
      for (std::size_t c = 0; c < dm; ++c) {
        dzm[j][c] += g * w_mob[c];
        grads->inter_weight[dp + c] += weight * g * mob[j].z[c];
      }
      grads->inter_bias[0] += weight * g;
    } else {
      const double g = nce.dlogits[q] / cfg.temperature;
      for (std::size_t c = 0; c < dp; ++c) {
        dzp[i][c] += g * um[j].u[c];
        dzm[j][c] += g * up[i].u[c];
      }
    }
  }
  for (std::size_t i = 0; i < poi.size(); ++i) {
    if (mode == InterMode::inner_product) {
      unit_backward(up[i], dzp[i]);
      unit_backward(um[i], dzm[i]);
    }
    mlp_backward_into(params.poi_encoder, poi[i].tape, dzp[i], grads->poi_encoder, weight, false);
    mob_backward(params, mob[i], dzm[i], *grads, weight, share);
  }
  return nce.loss;
}

double loss_mse_poi(const ReMvcParams& params, std::span<const double> f, ReMvcParams* grads, double weight) {
  if (!params.has_decoders()) throw ConfigError("loss_mse_poi: parameters have no decoders");
  check_width(f, params.poi_encoder.in(), "loss_mse_poi");
  const MlpOutput enc = mlp_forward(params.poi_encoder, f);
  const MlpOutput dec = mlp_forward(params.poi_decoder, enc.y);
  const double n = static_cast<double>(f.size());
  double loss = 0.0;
  std::vector<double> dy(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double e = dec.y[i] - f[i];
    loss += e * e;
    dy[i] = 2.0 * e / n;
  }
  loss /= n;
  if (grads) {
    const auto dz = mlp_backward_into(params.poi_decoder, dec.tape, dy, grads->poi_decoder, weight, true);
    mlp_backward_into(params.poi_encoder, enc.tape, dz, grads->poi_encoder, weight, false);
  }
  return loss;
}

double loss_mse_mob(const ReMvcParams& params, std::span<const double> ms, std::span<const double> md,
                    const ModelConfig& cfg, ReMvcParams* grads, double weight) {
  if (!params.has_decoders()) throw ConfigError("loss_mse_mob: parameters have no decoders");
  check_width(ms, params.mob_encoder_ms.in(), "loss_mse_mob (MS)");
  check_width(md, params.mob_encoder_ms.in(), "loss_mse_mob (MD)");
  const bool share = cfg.share_mobility_mlps;
  const MobPass pass = mob_forward(params, ms, md, share);
  const MlpOutput rec_ms = mlp_forward(params.mob_decoder_ms, pass.z);
  const MlpOutput rec_md = mlp_forward(params.mob_decoder_md, pass.z);
  const double n = static_cast<double>(ms.size() + md.size());
  double loss = 0.0;
  std::vector<double> dms(ms.size()), dmd(md.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const double e = rec_ms.y[i] - ms[i];
    loss += e * e;
    dms[i] = 2.0 * e / n;
  }
  for (std::size_t i = 0; i < md.size(); ++i) {
    const double e = rec_md.y[i] - md[i];
    loss += e * e;
    dmd[i] = 2.0 * e / n;
  }
  loss /= n;
  if (grads) {
    auto dz = mlp_backward_into(params.mob_decoder_ms, rec_ms.tape, dms, grads->mob_decoder_ms, weight, true);
    const auto dz2 = mlp_backward_into(params.mob_decoder_md, rec_md.tape, dmd, grads->mob_decoder_md, weight, true);
    for (std::size_t i = 0; i < dz.size(); ++i) dz[i] += dz2[i];
    mob_backward(params, pass, dz, *grads, weight, share);
  }
  return loss;
}

double loss_total(const LossParts& parts, double alpha, double beta) {
  auto check = [](const std::optional<double>& v, const char* name) {
    if (v && !std::isfinite(*v)) throw NumericError(std::string("loss_total: non-finite ") + name + " part");
  };
  check(parts.mob, "L_mob");
  check(parts.poi, "L_poi");
  check(parts.inter, "L_inter");
  double total = 0.0;
  if (parts.mob) total += *parts.mob;
  if (parts.poi) total += alpha * *parts.poi;
  if (parts.inter) total += beta * *parts.inter;
  return total;
}

std::vector<double> fuse(std::span<const double> z_poi, std::span<const double> z_mob, FuseStrategy strategy) {
  if (strategy == FuseStrategy::concat) {
    std::vector<double> out(z_poi.begin(), z_poi.end());
    out.insert(out.end(), z_mob.begin(), z_mob.end());
    return out;
  }
  if (z_poi.size() != z_mob.size()) throw ConfigError("fuse: average/max need equal view widths");
  std::vector<double> out(z_poi.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = strategy == FuseStrategy::average ? 0.5 * (z_poi[i] + z_mob[i]) : std::max(z_poi[i], z_mob[i]);
  return out;
}

EmbeddingMatrix final_embedding(const ReMvcParams& params, const Dataset& dataset, const ModelConfig& cfg,
                                EmbeddingViews views, FuseStrategy strategy) {
  if (!views.poi && !views.mob) throw ConfigError("final_embedding: no view enabled");
  const std::size_t L = dataset.size();
  if (dataset.poi.categories != params.poi_encoder.in())
    throw ShapeError("final_embedding: dataset has " + std::to_string(dataset.poi.categories) +
                     " POI categories, model expects " + std::to_string(params.poi_encoder.in()));
  if (dataset.heatmaps.block() != params.mob_encoder_ms.in())
    throw ShapeError("final_embedding: dataset heatmap size " + std::to_string(dataset.heatmaps.block()) +
                     " != model input " + std::to_string(params.mob_encoder_ms.in()));
  EmbeddingMatrix out;
  std::vector<std::vector<double>> rows(L);
  for (std::size_t k = 0; k < L; ++k) {
    std::vector<double> zp, zm;
    if (views.poi) zp = encode_poi(params, poi_ratios(dataset.poi, k));
    if (views.mob)
      zm = encode_mobility(params, dataset.heatmaps.ms(k), dataset.heatmaps.md(k), cfg.share_mobility_mlps);
    if (views.poi && views.mob) {
      rows[k] = fuse(zp, zm, strategy);
    } else {
      rows[k] = views.poi ? zp : zm;
    }
    for (double v : rows[k])
      if (!std::isfinite(v)) throw NumericError("final_embedding: non-finite value in region " + std::to_string(k));
  }
  const std::size_t width = rows.front().size();
  out.values = Dense(L, width);
  for (std::size_t k = 0; k < L; ++k) std::copy(rows[k].begin(), rows[k].end(), out.values.row(k).begin());
  if (strategy == FuseStrategy::concat || !(views.poi && views.mob)) {
    out.poi_width = views.poi ? params.poi_encoder.out() : 0;
    out.mob_width = views.mob ? params.mob_encoder_ms.out() : 0;
  } else {
    out.poi_width = width;
    out.mob_width = 0;
  }
  return out;
}

json to_json(const ModelConfig& c) {
  return json{{"poi_width", c.poi_width},
              {"mob_width", c.mob_width},
              {"hidden", c.hidden},
              {"temperature", c.temperature},
              {"alpha", c.alpha},
              {"beta", c.beta},
              {"poi_negatives", c.poi_negatives},
              {"mob_negatives", c.mob_negatives},
              {"inter_negatives", c.inter_negatives},
              {"poi_aug_p", c.poi_aug_p},
              {"mob_noise_sigma", c.mob_noise_sigma},
              {"normalize_intra", c.normalize_intra},
              {"share_mobility_mlps", c.share_mobility_mlps}};
}

void update_from_json(ModelConfig& c, const json& doc) {
  if (!doc.is_object()) throw ConfigError("model config must be a JSON object");
  static const std::set<std::string> known{"poi_width",     "mob_width",       "hidden",         "temperature",
                                           "alpha",         "beta",            "poi_negatives",  "mob_negatives",
                                           "inter_negatives", "poi_aug_p",     "mob_noise_sigma", "normalize_intra",
                                           "share_mobility_mlps"};
  for (const auto& [key, _] : doc.items())
    if (!known.count(key)) throw ConfigError("model config: unknown key '" + key + "'");
  try {
    c.poi_width = doc.value("poi_width", c.poi_width);
    c.mob_width = doc.value("mob_width", c.mob_width);
    c.hidden = doc.value("hidden", c.hidden);
    c.temperature = doc.value("temperature", c.temperature);
    c.alpha = doc.value("alpha", c.alpha);
    c.beta = doc.value("beta", c.beta);
    c.poi_negatives = doc.value("poi_negatives", c.poi_negatives);
    c.mob_negatives = doc.value("mob_negatives", c.mob_negatives);
    c.inter_negatives = doc.value("inter_negatives", c.inter_negatives);
    c.poi_aug_p = doc.value("poi_aug_p", c.poi_aug_p);
    c.mob_noise_sigma = doc.value("mob_noise_sigma", c.mob_noise_sigma);
    c.normalize_intra = doc.value("normalize_intra", c.normalize_intra);
    c.share_mobility_mlps = doc.value("share_mobility_mlps", c.share_mobility_mlps);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
}

}  // namespace remvc
