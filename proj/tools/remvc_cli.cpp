// remvc: ingest, synthesize, train, embed, evaluate and ablate from the shell.
//
// Exit codes: 0 success, 2 input or config error, 3 numeric failure,
// 4 verification failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "remvc/core_types.hpp"
#include "remvc/errors.hpp"
#include "remvc/eval.hpp"
#include "remvc/gradcheck.hpp"
#include "remvc/ingest.hpp"
#include "remvc/synth.hpp"
#include "remvc/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace remvc;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kNumericError = 3;
constexpr int kVerifyError = 4;

std::optional<std::uint64_t> seed_override() {
  const char* env = std::getenv("REMVC_SEED");
  if (env == nullptr || *env == '\0') return std::nullopt;
  char* end = nullptr;
  const auto v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw ConfigError(std::string("REMVC_SEED is not an unsigned integer: ") + env);
  return v;
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// `<dir>/<stem><suffix>` next to `path`.
std::string sibling(const std::string& path, const std::string& suffix) {
  const fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

struct RunConfig {
  TrainConfig train;
  std::optional<std::string> dataset;
  std::optional<std::string> checkpoint;
  std::optional<std::string> outputs;
  EvalOptions eval;
  std::size_t threads = 1;
};

// TrainConfig keys plus a few paths and ablation evaluation options.
RunConfig load_run_config(const std::optional<std::string>& path) {
  RunConfig rc;
  json doc = path ? read_json(*path) : json::object();
  if (!doc.is_object()) throw ConfigError("run config must be a JSON object");
  auto take_path = [&](const char* key, std::optional<std::string>& dst) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_string()) throw ConfigError(std::string("run config: ") + key + " must be a string");
    dst = doc[key].get<std::string>();
    doc.erase(key);
  };
  take_path("dataset", rc.dataset);
  take_path("checkpoint", rc.checkpoint);
  take_path("outputs", rc.outputs);
  if (doc.contains("eval")) {
    const json e = doc["eval"];
    doc.erase("eval");
    if (!e.is_object()) throw ConfigError("run config: eval must be an object");
    for (const auto& [key, value] : e.items()) {
      try {
        if (key == "k") rc.eval.k = value.get<std::size_t>();
        else if (key == "folds") rc.eval.folds = value.get<std::size_t>();
        else if (key == "penalty") rc.eval.penalty = value.get<double>();
        else if (key == "seed") rc.eval.seed = value.get<std::uint64_t>();
        else throw ConfigError("run config: unknown eval key '" + key + "'");
      } catch (const json::exception& ex) {
        throw ConfigError("run config: eval." + key + ": " + ex.what());
      }
    }
  }
  if (doc.contains("threads")) {
    if (!doc["threads"].is_number_unsigned()) throw ConfigError("run config: threads must be a positive integer");
    rc.threads = doc["threads"].get<std::size_t>();
    doc.erase("threads");
  }
  rc.train = train_config_from_json(doc);
  if (const auto s = seed_override()) rc.train.seed = *s;
  rc.train.check();
  return rc;
}

std::string need(const std::string& flag, const std::optional<std::string>& from_cli,
                 const std::optional<std::string>& from_config) {
  if (from_cli) return *from_cli;
  if (from_config) return *from_config;
  throw ConfigError(flag + " is required");
}

Dataset load_valid_dataset(const std::string& path) {
  Dataset d = load_dataset(path);
  const auto problems = validate(d);
  if (!problems.empty()) throw ValidationError(path + ": " + problems.front());
  return d;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const std::string& regions, const std::string& trips, const std::string& pois,
               const std::optional<std::string>& popularity, const std::string& out,
               const std::optional<std::string>& report_path, std::size_t hours, std::size_t threads) {
  const auto result = ingest_files(regions, trips, pois, popularity, hours, threads);
  const auto problems = validate(result.dataset);
  if (!problems.empty()) throw ValidationError("ingested dataset: " + problems.front());
  const std::string rp = report_path.value_or(sibling(out, ".report.json"));
  save_dataset(result.dataset, out);
  write_file_atomic(rp, to_json(result.report).dump(2) + "\n");
  std::cout << to_json(result.report).dump() << "\n";
  return kOk;
}

int cmd_synth(const std::optional<std::string>& config, const std::string& out,
              const std::optional<std::string>& labels_out, const std::optional<std::string>& popularity_out) {
  SynthConfig cfg = config ? synth_config_from_json(read_json(*config)) : SynthConfig{};
  if (const auto s = seed_override()) cfg.seed = *s;
  const Dataset d = generate_city(cfg);
  std::string labels = "region_id,label\n", pop = "region_id,count\n";
  for (std::size_t k = 0; k < d.size(); ++k) {
    labels += std::to_string(k) + "," + std::to_string((*d.labels)[k]) + "\n";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", k, (*d.popularity)[k]);
    pop += buf;
  }
  save_dataset(d, out);
  write_file_atomic(labels_out.value_or(sibling(out, ".labels.csv")), labels);
  write_file_atomic(popularity_out.value_or(sibling(out, ".popularity.csv")), pop);
  return kOk;
}

int cmd_train(const std::optional<std::string>& dataset_flag, const std::optional<std::string>& config,
              const std::optional<std::string>& out_flag) {
  const RunConfig rc = load_run_config(config);
  const std::string dataset_path = need("--dataset", dataset_flag, rc.dataset);
  const std::string out = need("--out", out_flag, rc.checkpoint);
  const Dataset d = load_valid_dataset(dataset_path);
  const auto result = train(
      d, rc.train, [](const EpochRecord& r) { std::cout << format_epoch(r) << std::endl; },
      [](const std::string& w) { std::cerr << "warning: " << w << "\n"; });
  save_checkpoint(make_checkpoint(result, rc.train, d), out);
  return kOk;
}

int cmd_embed(const std::string& ckpt_path, const std::string& dataset_path, const std::string& out) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Dataset d = load_valid_dataset(dataset_path);
  if (const auto w = fingerprint_warning(ckpt, d)) std::cerr << "warning: " << *w << "\n";
  write_file_atomic(out, format_embeddings_csv(embed(ckpt, d).values));
  return kOk;
}

int cmd_eval_cluster(const std::string& embeddings, const std::string& labels_path, std::size_t k,
                     std::uint64_t seed) {
  const Dense x = parse_embeddings_csv(read_file(embeddings));
  const auto labels = load_labels(labels_path, x.rows);
  std::cout << to_json(evaluate_clustering(x, labels, k, seed)).dump(2) << "\n";
  return kOk;
}

int cmd_eval_popularity(const std::string& embeddings, const std::string& popularity_path, std::size_t folds,
                        double penalty, std::uint64_t seed) {
  const Dense x = parse_embeddings_csv(read_file(embeddings));
  const auto y = load_popularity(popularity_path, x.rows);
  std::cout << to_json(cross_validate_popularity(x, y, folds, seed, penalty)).dump(2) << "\n";
  return kOk;
}

int cmd_ablate(const std::optional<std::string>& dataset_flag, const std::optional<std::string>& config,
               const std::optional<std::string>& out_flag, std::optional<std::size_t> threads_flag) {
  const RunConfig rc = load_run_config(config);
  const std::string dataset_path = need("--dataset", dataset_flag, rc.dataset);
  const std::string out = need("--out", out_flag, rc.outputs);
  const Dataset d = load_valid_dataset(dataset_path);
  const auto rows = run_ablation_suite(d, rc.train, rc.eval, threads_flag.value_or(rc.threads));
  write_file_atomic(out, to_json(rows).dump(2) + "\n");
  return kOk;
}

int cmd_gradcheck(std::uint64_t seed, bool corrupt) {
  constexpr double kTolerance = 1e-4;
  const auto results = gradcheck_suite(seed, 5, corrupt);
  int status = kOk;
  for (const auto& r : results) {
    std::printf("%-6s max_rel_error=%.3e params=%zu\n", r.loss.c_str(), r.max_rel_error, r.parameters);
    if (!(r.max_rel_error <= kTolerance)) {
      std::fprintf(stderr, "gradient mismatch: loss %s, parameter index %zu (%s), relative error %.3e\n",
                   r.loss.c_str(), r.worst_index, r.worst_tensor.c_str(), r.max_rel_error);
      status = kVerifyError;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view contrastive urban region embeddings"};
  app.require_subcommand(1);
  std::size_t threads = 1;

  auto* ingest = app.add_subcommand("ingest", "Build a dataset from GeoJSON regions and trip / POI CSVs");
  std::string in_regions, in_trips, in_pois, in_out;
  std::optional<std::string> in_pop, in_report;
  std::size_t in_hours = 24;
  ingest->add_option("--regions", in_regions, "GeoJSON FeatureCollection of region polygons")->required();
  ingest->add_option("--trips", in_trips, "Trip CSV")->required();
  ingest->add_option("--pois", in_pois, "POI CSV")->required();
  ingest->add_option("--popularity", in_pop, "region_id,count CSV");
  ingest->add_option("--out", in_out, "Dataset JSON")->required();
  ingest->add_option("--report", in_report, "Ingest report JSON (default <out stem>.report.json)");
  ingest->add_option("--hours", in_hours, "Time slices per day")->check(CLI::Range(1, 24));
  ingest->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic city");
  std::optional<std::string> sy_config, sy_labels, sy_pop;
  std::string sy_out;
  synth->add_option("--config", sy_config, "SynthConfig JSON (defaults when omitted)");
  synth->add_option("--out", sy_out, "Dataset JSON")->required();
  synth->add_option("--labels-out", sy_labels, "Labels CSV (default <out stem>.labels.csv)");
  synth->add_option("--popularity-out", sy_pop, "Popularity CSV (default <out stem>.popularity.csv)");

  auto* trainc = app.add_subcommand("train", "Train and write a checkpoint");
  std::optional<std::string> tr_dataset, tr_config, tr_out;
  trainc->add_option("--dataset", tr_dataset, "Dataset JSON");
  trainc->add_option("--config", tr_config, "Run config JSON");
  trainc->add_option("--out", tr_out, "Checkpoint JSON");

  auto* embedc = app.add_subcommand("embed", "Write final region embeddings as CSV");
  std::string em_ckpt, em_dataset, em_out;
  embedc->add_option("--ckpt", em_ckpt, "Checkpoint JSON")->required();
  embedc->add_option("--dataset", em_dataset, "Dataset JSON")->required();
  embedc->add_option("--out", em_out, "Embeddings CSV")->required();

  auto* evalc = app.add_subcommand("eval", "Evaluate embeddings on a downstream task");
  evalc->require_subcommand(1);
  auto* cluster = evalc->add_subcommand("cluster", "k-means against land-use labels");
  std::string ev_emb, ev_labels, ev_pop;
  std::size_t ev_k = 29, ev_folds = 5;
  std::uint64_t ev_seed = 42;
  double ev_penalty = 0.1;
  cluster->add_option("--embeddings", ev_emb, "Embeddings CSV")->required();
  cluster->add_option("--labels", ev_labels, "region_id,label CSV")->required();
  cluster->add_option("--k", ev_k, "Clusters")->check(CLI::PositiveNumber);
  cluster->add_option("--seed", ev_seed, "k-means seed");
  auto* popc = evalc->add_subcommand("popularity", "Cross-validated Lasso popularity regression");
  popc->add_option("--embeddings", ev_emb, "Embeddings CSV")->required();
  popc->add_option("--popularity", ev_pop, "region_id,count CSV")->required();
  popc->add_option("--folds", ev_folds, "Cross-validation folds");
  popc->add_option("--penalty", ev_penalty, "L1 penalty")->check(CLI::NonNegativeNumber);
  popc->add_option("--seed", ev_seed, "Fold shuffle seed");

  auto* ablate = app.add_subcommand("ablate", "Train and evaluate every ablation variant");
  std::optional<std::string> ab_dataset, ab_config, ab_out;
  std::optional<std::size_t> ab_threads;
  ablate->add_option("--dataset", ab_dataset, "Dataset JSON");
  ablate->add_option("--config", ab_config, "Run config JSON");
  ablate->add_option("--out", ab_out, "Table JSON");
  ablate->add_option("--threads", ab_threads, "Variants trained in parallel")->check(CLI::PositiveNumber);

  auto* grad = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  std::uint64_t gc_seed = 42;
  bool gc_corrupt = false;
  grad->add_option("--seed", gc_seed, "Seed of the toy configurations");
  // Negative control for tests: perturb one analytic gradient component.
  grad->add_flag("--corrupt-gradient", gc_corrupt)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*ingest) return cmd_ingest(in_regions, in_trips, in_pois, in_pop, in_out, in_report, in_hours, threads);
    if (*synth) return cmd_synth(sy_config, sy_out, sy_labels, sy_pop);
    if (*trainc) return cmd_train(tr_dataset, tr_config, tr_out);
    if (*embedc) return cmd_embed(em_ckpt, em_dataset, em_out);
    if (*cluster) return cmd_eval_cluster(ev_emb, ev_labels, ev_k, ev_seed);
    if (*popc) return cmd_eval_popularity(ev_emb, ev_pop, ev_folds, ev_penalty, ev_seed);
    if (*ablate) return cmd_ablate(ab_dataset, ab_config, ab_out, ab_threads);
    if (*grad) return cmd_gradcheck(gc_seed, gc_corrupt);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumericError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
