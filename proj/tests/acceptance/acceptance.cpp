// Acceptance run: one PASS/FAIL line per criterion.
//
//   remvc_acceptance [--remvc PATH] [--only N] [--strict]
//
// With --remvc the determinism criterion drives the command-line tool;
// otherwise it goes through the same library calls. The process exits 0 once
// every criterion has been evaluated (1 under --strict if any failed) and 2
// if the harness itself broke.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "remvc/augment.hpp"
#include "remvc/eval.hpp"
#include "remvc/gradcheck.hpp"
#include "remvc/ingest.hpp"
#include "remvc/model.hpp"
#include "remvc/sampler.hpp"
#include "remvc/synth.hpp"
#include "remvc/trainer.hpp"

using namespace remvc;
using Clock = std::chrono::steady_clock;
using Vec = std::vector<double>;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failures;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    failures += (pass ? " | failed: " : "; ") + what;
    pass = false;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// ---------------------------------------------------------------- 1

void gradient_suite(Outcome& o) {
  constexpr double kTol = 1e-4;
  constexpr std::uint64_t kConfigs = 5;
  const auto t0 = Clock::now();
  for (auto loss : {CheckedLoss::poi, CheckedLoss::mob, CheckedLoss::inter, CheckedLoss::joint, CheckedLoss::mse}) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < kConfigs; ++seed) {
      const auto r = gradcheck(loss, seed);
      worst = std::max(worst, r.max_rel_error);
      o.require(r.max_rel_error <= kTol, std::string(loss_name(loss)) + " seed " + std::to_string(seed) + " at " +
                                             r.worst_tensor + " rel " + fmt("%.2e", r.max_rel_error));
    }
    o.detail << loss_name(loss) << "=" << fmt("%.1e", worst) << " ";
  }
  const Dataset toy = toy_dataset(0);
  o.require(toy.size() == 4 && toy.poi.categories == 3 && toy.heatmaps.hours == 2, "toy shape is not L=4 F=3 H=2");
  const double secs = seconds_since(t0);
  o.detail << "over " << kConfigs << " configs in " << fmt("%.2f", secs) << " s";
  o.require(secs < 10.0, "runtime " + fmt("%.1f", secs) + " s");
}

// ---------------------------------------------------------------- 2

void closed_forms(Outcome& o) {
  ModelConfig cfg;  // N_p = 150, N_m = 10, N_i = 5
  Rng rng(1);
  const ReMvcParams p = zeros_like(init_params(cfg, 4, 6, rng));
  const Vec f{0.25, 0.25, 0.25, 0.25};
  const std::vector<Vec> pos(3, f), neg(cfg.poi_negatives, f);
  const double poi = loss_poi(p, f, pos, neg, cfg);

  const HeatmapPair h{Vec(6, 1.0 / 6), Vec(6, 1.0 / 6)};
  const std::vector<HeatmapPair> mpos(1, h), mneg(cfg.mob_negatives, h);
  const double mob = loss_mob(p, h, mpos, mneg, cfg);

  const RegionInput r{f, h.ms, h.md};
  const std::vector<RegionInput> ineg(cfg.inter_negatives, r);
  const double inter = loss_inter(p, r, ineg, cfg);

  o.require(std::abs(poi - std::log(51.0)) <= 1e-9, "L_poi " + fmt("%.17g", poi));
  o.require(std::abs(mob - std::log(11.0)) <= 1e-9, "L_mob " + fmt("%.17g", mob));
  o.require(std::abs(inter - std::log(11.0)) <= 1e-9, "L_inter " + fmt("%.17g", inter));
  o.detail << "L_poi-log51=" << fmt("%.1e", poi - std::log(51.0)) << " L_mob-log11=" << fmt("%.1e", mob - std::log(11.0))
           << " L_inter-log11=" << fmt("%.1e", inter - std::log(11.0));
}

// ---------------------------------------------------------------- 3

void loss_invariants(Outcome& o) {
  const Dataset d = toy_dataset(99);
  const ModelConfig cfg = toy_model_config();
  const std::size_t F = d.poi.categories, HL = d.heatmaps.block();
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 2.0);
  auto rand_vec = [&](std::size_t len) {
    Vec v(len);
    for (auto& x : v) x = u(rng);
    return v;
  };
  constexpr int kTrials = 10000;
  int negatives = 0, below_one = 0;
  double worst_shift = 0.0, min_dir = INFINITY;
  for (int t = 0; t < kTrials; ++t) {
    Rng init(static_cast<std::uint64_t>(t));
    ReMvcParams p = init_params(cfg, F, HL, init, true);
    p.inter_bias[0] = n(rng);
    for (auto& w : p.inter_weight) w = n(rng);
    const Vec a = rand_vec(F);
    const std::vector<Vec> pos{rand_vec(F), rand_vec(F), rand_vec(F)}, neg{rand_vec(F), rand_vec(F), rand_vec(F)};
    const HeatmapPair h{rand_vec(HL), rand_vec(HL)};
    const std::vector<HeatmapPair> hp{{rand_vec(HL), rand_vec(HL)}}, hn{{rand_vec(HL), rand_vec(HL)}, {rand_vec(HL), rand_vec(HL)}};
    const Vec nf = rand_vec(F), nms = rand_vec(HL), nmd = rand_vec(HL);
    const std::vector<RegionInput> in{{nf, nms, nmd}};
    const RegionInput anchor{a, h.ms, h.md};
    const double losses[] = {loss_poi(p, a, pos, neg, cfg),
                             loss_mob(p, h, hp, hn, cfg),
                             loss_inter(p, anchor, in, cfg, InterMode::classifier),
                             loss_inter(p, anchor, in, cfg, InterMode::inner_product),
                             loss_mse_poi(p, a),
                             loss_mse_mob(p, h.ms, h.md, cfg)};
    for (double l : losses) negatives += !(l >= 0.0);

    // InfoNCE over arbitrary logits, then the same logits shifted uniformly.
    Vec logits(2 + t % 12);
    for (auto& v : logits) v = 20.0 * n(rng);
    const std::size_t positives = 1 + static_cast<std::size_t>(t) % (logits.size() - 1);
    Vec shifted = logits;
    const double c = 50.0 * n(rng);
    for (auto& v : shifted) v += c;
    const auto base = info_nce(logits, positives);
    negatives += !(base.loss >= 0.0);
    worst_shift = std::max(worst_shift, std::abs(base.loss - info_nce(shifted, positives).loss));

    const Vec zp = rand_vec(cfg.poi_width), zm = rand_vec(cfg.mob_width);
    Vec zp_signed = zp;
    for (auto& v : zp_signed) v = 4.0 * (v - 0.5);
    const double dir = d_inter(p, zp_signed, zm);
    min_dir = std::min(min_dir, dir);
    below_one += !(dir >= 1.0);
  }
  o.require(negatives == 0, std::to_string(negatives) + " negative losses");
  o.require(worst_shift <= 1e-9, "shift changed the loss by " + fmt("%.2e", worst_shift));
  o.require(below_one == 0, std::to_string(below_one) + " inter scores below 1");
  o.detail << kTrials << " trials, negative=" << negatives << " max shift delta=" << fmt("%.1e", worst_shift)
           << " min D_ir=" << fmt("%.6f", min_dir);
}

// ---------------------------------------------------------------- 4

void metric_oracles(Outcome& o) {
  Rng rng(4);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 50)(rng);
    const int ka = std::uniform_int_distribution<int>(1, 6)(rng), kb = std::uniform_int_distribution<int>(1, 6)(rng);
    std::vector<int> a(n), b(n);
    for (auto& v : a) v = std::uniform_int_distribution<int>(0, ka - 1)(rng);
    for (auto& v : b) v = std::uniform_int_distribution<int>(0, kb - 1)(rng);
    const auto pairs = oracle::enumerate_pairs(a, b);
    worst = std::max({worst, std::abs(nmi(a, b) - oracle::nmi(a, b)), std::abs(ari(a, b) - oracle::ari_from_pairs(pairs)),
                      std::abs(f_measure(a, b) - oracle::f_from_pairs(pairs, 0.5))});
  }
  o.require(worst <= 1e-9, "oracle disagreement " + fmt("%.2e", worst));

  const std::vector<int> same{0, 0, 1, 2, 2, 1, 3}, relabeled{5, 5, 0, 9, 9, 0, 1};
  for (const auto* other : {&same, &relabeled}) {
    o.require(nmi(same, *other) == 1.0, "identical partitions NMI != 1");
    o.require(ari(same, *other) == 1.0, "identical partitions ARI != 1");
    o.require(f_measure(same, *other) == 1.0, "identical partitions F != 1");
  }
  const std::vector<int> x{0, 0, 1, 1}, y{0, 1, 0, 1};
  o.require(nmi(x, y) == 0.0, "independent NMI " + fmt("%.17g", nmi(x, y)));
  o.require(ari(x, y) == -0.5, "independent ARI " + fmt("%.17g", ari(x, y)));

  double sum = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<int> a(50), b(50);
    for (auto& v : a) v = std::uniform_int_distribution<int>(0, 3)(rng);
    for (auto& v : b) v = std::uniform_int_distribution<int>(0, 3)(rng);
    sum += ari(a, b);
  }
  const double mean = sum / 1000.0;
  o.require(mean > -0.05 && mean < 0.05, "mean random ARI " + fmt("%.4f", mean));
  o.detail << "max oracle delta=" << fmt("%.1e", worst) << " NMI(x,y)=" << nmi(x, y) << " ARI(x,y)=" << ari(x, y)
           << " mean random ARI=" << fmt("%.4f", mean);
}

// ---------------------------------------------------------------- 5

void lasso(Outcome& o) {
  Rng rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  Dense x(50, 5);
  std::vector<std::vector<double>> rows(50, Vec(5));
  Vec y(50);
  const Vec truth{1.5, -2.0, 0.5, 3.0, -1.0};
  for (std::size_t i = 0; i < 50; ++i) {
    double yi = 0.7;
    for (std::size_t j = 0; j < 5; ++j) {
      rows[i][j] = x(i, j) = n(rng);
      yi += truth[j] * x(i, j);
    }
    y[i] = yi + 0.1 * n(rng);
  }
  const auto fit = lasso_fit(x, y, 1e-10);
  const auto ols = oracle::ols(rows, y);
  double worst = std::abs(fit.intercept - ols[5]);
  for (std::size_t j = 0; j < 5; ++j) worst = std::max(worst, std::abs(fit.weights[j] - ols[j]));
  o.require(worst <= 1e-6, "coefficient delta " + fmt("%.2e", worst));
  int increases = 0;
  for (std::size_t s = 1; s < fit.objective_trace.size(); ++s) increases += fit.objective_trace[s] > fit.objective_trace[s - 1];
  o.require(increases == 0, std::to_string(increases) + " objective increases");
  o.detail << "max |w - w_ols|=" << fmt("%.1e", worst) << " sweeps=" << fit.objective_trace.size()
           << " increases=" << increases;
}

// ---------------------------------------------------------------- 6

nlohmann::json polygon_feature(const std::vector<std::pair<double, double>>& ring) {
  nlohmann::json coords = nlohmann::json::array();
  for (const auto& [x, y] : ring) coords.push_back({x, y});
  coords.push_back(coords.front());
  return {{"type", "Feature"}, {"properties", nlohmann::json::object()},
          {"geometry", {{"type", "Polygon"}, {"coordinates", {coords}}}}};
}

nlohmann::json collection(const std::vector<nlohmann::json>& features) {
  return {{"type", "FeatureCollection"}, {"features", features}};
}

void ingestion(Outcome& o) {
  // A 3 x 3 grid of unit cells; trips land on [-0.5, 3.5]^2 so some miss.
  std::vector<nlohmann::json> cells;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) cells.push_back(polygon_feature({{c, r}, {c + 1, r}, {c + 1, r + 1}, {c, r + 1}}));
  const auto grid = parse_regions(collection(cells)).boundaries;
  int streams_bad = 0;
  std::size_t total_accepted = 0, total_skipped = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(1000 + s);
    std::uniform_real_distribution<double> coord(-0.5, 3.5);
    std::uniform_int_distribution<int> hour(0, 23);
    const std::size_t count = 500 + 100 * s;
    std::vector<TripRecord> trips(count);
    for (auto& t : trips) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "2015-03-02 %02d:%02d:00", hour(rng), hour(rng));
      t = {coord(rng), coord(rng), coord(rng), coord(rng), buf};
    }
    const auto built = build_heatmaps(trips, grid, 9, 24, 1 + s % 3);
    const double ms = std::accumulate(built.heatmaps.ms_data.begin(), built.heatmaps.ms_data.end(), 0.0);
    const double md = std::accumulate(built.heatmaps.md_data.begin(), built.heatmaps.md_data.end(), 0.0);
    const double acc = static_cast<double>(built.accepted);
    if (!(ms == acc && md == acc && built.accepted + built.skipped == count)) ++streams_bad;
    total_accepted += built.accepted;
    total_skipped += built.skipped;
  }
  o.require(streams_bad == 0, std::to_string(streams_bad) + " streams lost or gained mass");

  Rng rng(2024);
  std::uniform_real_distribution<double> u(-1.5, 1.5), ang(0.0, 2.0 * std::numbers::pi), rad(0.3, 1.2);
  int disagreements = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> angles(3 + t % 8);
    for (auto& a : angles) a = ang(rng);
    std::sort(angles.begin(), angles.end());
    const double r = rad(rng);
    std::vector<std::pair<double, double>> ring;
    for (double a : angles) ring.push_back({r * std::cos(a), r * std::sin(a)});
    const auto b = parse_regions(collection({polygon_feature(ring)})).boundaries;
    const double px = u(rng), py = u(rng);
    if (assign_point(b, px, py).has_value() != (oracle::winding_number(ring, px, py) != 0)) ++disagreements;
  }
  o.require(disagreements == 0, std::to_string(disagreements) + " point-in-polygon disagreements");
  o.detail << "20 streams, accepted=" << total_accepted << " skipped=" << total_skipped
           << " mass mismatches=" << streams_bad << "; 1000 polygons, disagreements=" << disagreements;
}

// ---------------------------------------------------------------- 7, 8

// Observed NMI of the full model on this benchmark when the test was written
// was 0.602, so the committed floor is 0.602 - 0.05.
constexpr double kBenchmarkNmiFloor = 0.552;

struct Benchmark {
  Dataset city;
  EvalOptions eval;
  TrainConfig config;
  std::optional<EvalReport> full_cluster, full_popularity;
  double tfidf_nmi = 0.0;
  double seconds = 0.0;
  std::size_t epochs = 0;
};

Benchmark& benchmark() {
  static Benchmark b = [] {
    Benchmark out;
    const auto t0 = Clock::now();
    SynthConfig sc;  // seed 42, L=80, K=4, F=12, H=24, 200 000 trips
    out.city = generate_city(sc);
    out.eval.k = sc.clusters;
    out.eval.seed = 42;
    const auto result = train(out.city, out.config);
    out.epochs = result.history.size();
    const Dense e = final_embedding(result.params, out.city, out.config.model).values;
    std::tie(out.full_cluster, out.full_popularity) = evaluate_embeddings(e, out.city, out.eval);
    out.tfidf_nmi = evaluate_clustering(tfidf_baseline(out.city.poi), *out.city.labels, sc.clusters, 42).metrics.at("NMI");
    out.seconds = seconds_since(t0);
    return out;
  }();
  return b;
}

void end_to_end(Outcome& o) {
  const Benchmark& b = benchmark();
  const double nmi_full = b.full_cluster->metrics.at("NMI");
  o.require(nmi_full >= kBenchmarkNmiFloor, "NMI " + fmt("%.4f", nmi_full) + " below " + fmt("%.3f", kBenchmarkNmiFloor));
  o.require(nmi_full > b.tfidf_nmi, "NMI " + fmt("%.4f", nmi_full) + " does not exceed TF-IDF " + fmt("%.4f", b.tfidf_nmi));
  o.require(b.seconds < 300.0, "wall time " + fmt("%.0f", b.seconds) + " s");
  o.detail << "NMI=" << fmt("%.4f", nmi_full) << " (floor " << kBenchmarkNmiFloor << ") TF-IDF NMI="
           << fmt("%.4f", b.tfidf_nmi) << " epochs=" << b.epochs << " time=" << fmt("%.1f", b.seconds) << " s";
}

void ablation_ordering(Outcome& o) {
  Benchmark& b = benchmark();
  const auto rows = run_ablation_suite(b.city, b.config, b.eval, 1, {"no_poi", "no_mob", "no_iv"});
  auto metric = [&](const std::string& name, bool cluster, const char* key) {
    for (const auto& r : rows)
      if (r.name == name) return (cluster ? r.clustering : r.popularity)->metrics.at(key);
    throw std::runtime_error("missing ablation row " + name);
  };
  const double full_nmi = b.full_cluster->metrics.at("NMI"), full_r2 = b.full_popularity->metrics.at("R2");
  const double no_poi = metric("no_poi", true, "NMI"), no_mob = metric("no_mob", true, "NMI");
  const double no_iv_r2 = metric("no_iv", false, "R2");
  o.require(full_nmi >= std::max(no_poi, no_mob) - 0.02,
            "full NMI " + fmt("%.4f", full_nmi) + " < max(w/o POI, w/o Mob) - 0.02");
  o.require(full_r2 >= no_iv_r2 - 0.02, "full R2 " + fmt("%.4f", full_r2) + " < w/o IV R2 - 0.02");
  o.detail << "NMI full=" << fmt("%.4f", full_nmi) << " w/o POI=" << fmt("%.4f", no_poi) << " w/o Mob="
           << fmt("%.4f", no_mob) << "; R2 full=" << fmt("%.4f", full_r2) << " w/o IV=" << fmt("%.4f", no_iv_r2);
}

// ---------------------------------------------------------------- 9

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("remvc_acceptance_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

void determinism(Outcome& o, const std::optional<std::string>& cli) {
  TempDir tmp;
  SynthConfig sc;
  sc.regions = 24;
  sc.clusters = 3;
  sc.trips = 20000;
  sc.seed = 9;
  TrainConfig tc;
  tc.max_epochs = 3;
  const std::string city = (tmp.path / "city.json").string(), run_cfg = (tmp.path / "run.json").string();
  const std::string ck_a = (tmp.path / "a.json").string(), ck_b = (tmp.path / "b.json").string();
  const std::string emb = (tmp.path / "emb.csv").string();
  write_file_atomic((tmp.path / "synth.json").string(), to_json(sc).dump());
  write_file_atomic(run_cfg, to_json(tc).dump());
  const Dataset d = generate_city(sc);

  if (cli) {
    const std::string q = "'" + *cli + "'";
    o.require(run(q + " synth --config " + (tmp.path / "synth.json").string() + " --out " + city) == 0, "cmd_synth failed");
    for (const auto& out : {ck_a, ck_b})
      o.require(run(q + " train --dataset " + city + " --config " + run_cfg + " --out " + out) == 0, "cmd_train failed");
    o.require(run(q + " embed --ckpt " + ck_a + " --dataset " + city + " --out " + emb) == 0, "cmd_embed failed");
    o.detail << "via CLI; ";
  } else {
    save_dataset(d, city);
    for (const auto& out : {ck_a, ck_b}) save_checkpoint(make_checkpoint(train(d, tc), tc, d), out);
    write_file_atomic(emb, format_embeddings_csv(embed(load_checkpoint(ck_a), d).values));
    o.detail << "via library; ";
  }
  if (!o.pass) return;
  const std::string a = read_file(ck_a), b = read_file(ck_b);
  o.require(a == b, "checkpoints differ");

  // The CSV parses back to exactly the embedding the checkpoint produces,
  // and printing it again gives the same bytes.
  const std::string csv = read_file(emb);
  const Dense parsed = parse_embeddings_csv(csv);
  const Dense direct = embed(load_checkpoint(ck_a), load_dataset(city)).values;
  o.require(parsed.rows == direct.rows && parsed.cols == direct.cols && parsed.data == direct.data,
            "embedding CSV does not round-trip bit for bit");
  o.require(format_embeddings_csv(parsed) == csv, "re-printed CSV differs");
  o.detail << "checkpoint bytes=" << a.size() << " identical=" << (a == b) << "; embedding " << parsed.rows << "x"
           << parsed.cols << " round-trips exactly";
}

// ---------------------------------------------------------------- 10

void augmentation_sampling(Outcome& o) {
  Rng rng(10);
  const std::vector<std::int64_t> counts{4, 0, 7, 1, 3};
  const auto ratios = poi_ratios(counts);
  for (auto kind : {PoiAugmentationKind::insertion, PoiAugmentationKind::deletion, PoiAugmentationKind::replacement})
    for (int t = 0; t < 100; ++t) o.require(augment_poi(counts, {kind, 0.0}, rng) == ratios, "p=0 changed a POI vector");
  for (int t = 0; t < 100; ++t)
    o.require(augment_poi(counts, {PoiAugmentationKind::deletion, 1.0}, rng) == Vec(counts.size(), 0.0),
              "deletion p=1 left POIs");
  const Vec ms{0.1, 0.0, 0.4, 0.5}, md{0.25, 0.25, 0.0, 0.5};
  for (int t = 0; t < 100; ++t) {
    const auto h = augment_mobility(ms, md, {0.0}, rng);
    o.require(h.ms == ms && h.md == md, "sigma=0 changed a heatmap");
  }

  SynthConfig sc;
  sc.regions = 16;
  sc.trips = 5000;
  const Dataset d = generate_city(sc);
  const FeatureTable table = FeatureTable::from_dataset(d);
  double worst_sum = 0.0;
  bool anchor_excluded = true;
  for (auto strategy : {NegativeStrategy::feature_distance, NegativeStrategy::euclidean, NegativeStrategy::uniform})
    for (auto view : {View::poi, View::mobility})
      for (std::size_t a = 0; a < d.size(); ++a) {
        const auto w = sampling_weights(a, view, strategy, table);
        worst_sum = std::max(worst_sum, std::abs(std::accumulate(w.probs.begin(), w.probs.end(), 0.0) - 1.0));
        anchor_excluded &= std::find(w.candidates.begin(), w.candidates.end(), a) == w.candidates.end();
      }
  o.require(worst_sum <= 1e-12, "weights sum off by " + fmt("%.2e", worst_sum));
  o.require(anchor_excluded, "anchor among candidates");

  // Region 0 of the feature-distance POI weights, drawn 10^5 times.
  const auto w = sampling_weights(0, View::poi, NegativeStrategy::feature_distance, table);
  std::vector<int> hits(w.candidates.size(), 0);
  constexpr int kDraws = 100000;
  Rng draw(11);
  for (int t = 0; t < kDraws; ++t) {
    const auto pick = sample_negatives(w, 1, draw)[0];
    ++hits[std::find(w.candidates.begin(), w.candidates.end(), pick) - w.candidates.begin()];
  }
  double worst_freq = 0.0;
  for (std::size_t i = 0; i < hits.size(); ++i)
    worst_freq = std::max(worst_freq, std::abs(hits[i] / static_cast<double>(kDraws) - w.probs[i]));
  o.require(worst_freq <= 0.01, "Monte-Carlo frequency off by " + fmt("%.4f", worst_freq));
  o.detail << "identities hold; max |sum-1|=" << fmt("%.1e", worst_sum) << " max |freq-p|=" << fmt("%.4f", worst_freq)
           << " over " << kDraws << " draws";
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<std::string> cli;
  std::optional<int> only;
  bool strict = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--remvc" && i + 1 < argc) cli = argv[++i];
    else if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
    else if (arg == "--strict") strict = true;
    else {
      std::fprintf(stderr, "usage: %s [--remvc PATH] [--only N] [--strict]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"gradient suite", gradient_suite},
      {"loss closed forms", closed_forms},
      {"loss invariants", loss_invariants},
      {"metric oracles", metric_oracles},
      {"lasso vs least squares", lasso},
      {"ingestion conservation", ingestion},
      {"end-to-end synthetic benchmark", end_to_end},
      {"ablation ordering", ablation_ordering},
      {"determinism", [&](Outcome& o) { determinism(o, cli); }},
      {"augmentation and sampling", augmentation_sampling},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && *only != static_cast<int>(i + 1)) continue;
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      std::printf("ERROR %zu %s: %s\n", i + 1, criteria[i].first.c_str(), e.what());
      return 2;
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), (o.detail.str() + o.failures).c_str());
    std::fflush(stdout);
  }
  std::printf("%d failed\n", failed);
  return strict && failed > 0 ? 1 : 0;
}
