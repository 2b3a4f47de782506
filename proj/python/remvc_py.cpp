// Python bindings for the main pipeline operations. Configs and reports cross
// the boundary as JSON text; matrices as float64 numpy arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "remvc/errors.hpp"
#include "remvc/eval.hpp"
#include "remvc/gradcheck.hpp"
#include "remvc/ingest.hpp"
#include "remvc/synth.hpp"
#include "remvc/trainer.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace remvc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Dense to_dense(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
  Dense out(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), out.data.begin());
  return out;
}

Array to_array(const Dense& d) {
  Array out({d.rows, d.cols});
  std::copy(d.data.begin(), d.data.end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw ShapeError("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

json parse_config(const std::string& text) {
  if (text.empty()) return json::object();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_remvc, m) {
  m.doc() = "Multi-view contrastive urban region embeddings";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<RequestError>(m, "RequestError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<IndexError>(m, "IndexError", base.ptr());

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("regions", &Dataset::size)
      .def_property_readonly("categories", [](const Dataset& d) { return d.poi.categories; })
      .def_property_readonly("hours", [](const Dataset& d) { return d.heatmaps.hours; })
      .def_property_readonly("labels", [](const Dataset& d) { return d.labels; })
      .def_property_readonly("popularity", [](const Dataset& d) { return d.popularity; })
      .def_property_readonly("poi_counts",
                             [](const Dataset& d) {
                               py::array_t<std::int64_t> out({d.poi.regions, d.poi.categories});
                               std::copy(d.poi.data.begin(), d.poi.data.end(), out.mutable_data());
                               return out;
                             })
      .def("validate", [](const Dataset& d) { return validate(d); })
      .def("fingerprint", [](const Dataset& d) { return fingerprint(d); })
      .def("to_json", [](const Dataset& d) { return serialize(d); })
      .def("save", [](const Dataset& d, const std::string& path) { save_dataset(d, path); }, py::arg("path"));

  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("dataset_from_json", [](const std::string& text) { return dataset_from_json(parse_config(text)); },
        py::arg("text"));
  m.def("synth_city", [](const std::string& config) { return generate_city(synth_config_from_json(parse_config(config))); },
        py::arg("config") = "", "Seeded synthetic city from SynthConfig JSON (keys L, K, F, H, trips, ...).");
  m.def(
      "ingest",
      [](const std::string& regions, const std::string& trips, const std::string& pois,
         std::optional<std::string> popularity, std::size_t hours, std::size_t threads) {
        auto r = ingest_files(regions, trips, pois, popularity, hours, threads);
        return py::make_tuple(std::move(r.dataset), to_json(r.report).dump());
      },
      py::arg("regions"), py::arg("trips"), py::arg("pois"), py::arg("popularity") = py::none(),
      py::arg("hours") = 24, py::arg("threads") = 1, "Returns (dataset, report JSON).");

  py::class_<Checkpoint>(m, "Checkpoint")
      .def_property_readonly("config", [](const Checkpoint& c) { return to_json(c.config).dump(); })
      .def_property_readonly("history",
                             [](const Checkpoint& c) {
                               json h = json::array();
                               for (const auto& e : c.history) h.push_back(to_json(e));
                               return h.dump();
                             })
      .def("to_json", [](const Checkpoint& c) { return serialize(c); })
      .def("save", [](const Checkpoint& c, const std::string& path) { save_checkpoint(c, path); }, py::arg("path"));

  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));
  m.def(
      "train",
      [](const Dataset& d, const std::string& config) {
        const TrainConfig cfg = train_config_from_json(parse_config(config));
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(d, cfg);
        }
        return make_checkpoint(r, cfg, d);
      },
      py::arg("dataset"), py::arg("config") = "", "Train from TrainConfig JSON; returns a checkpoint.");
  m.def(
      "embed", [](const Checkpoint& c, const Dataset& d) { return to_array(embed(c, d).values); }, py::arg("checkpoint"),
      py::arg("dataset"));
  m.def("fingerprint_warning", &fingerprint_warning, py::arg("checkpoint"), py::arg("dataset"));

  m.def(
      "evaluate_clustering",
      [](const Array& e, const std::vector<int>& labels, std::size_t k, std::uint64_t seed) {
        return to_json(evaluate_clustering(to_dense(e), labels, k, seed)).dump();
      },
      py::arg("embeddings"), py::arg("labels"), py::arg("k") = 29, py::arg("seed") = 42);
  m.def(
      "cross_validate_popularity",
      [](const Array& e, const Array& y, std::size_t folds, std::uint64_t seed, double penalty) {
        return to_json(cross_validate_popularity(to_dense(e), to_vector(y), folds, seed, penalty)).dump();
      },
      py::arg("embeddings"), py::arg("popularity"), py::arg("folds") = 5, py::arg("seed") = 42,
      py::arg("penalty") = 0.1);
  m.def("tfidf_baseline", [](const Dataset& d) { return to_array(tfidf_baseline(d.poi)); }, py::arg("dataset"));
  m.def("nmi", [](const std::vector<int>& a, const std::vector<int>& b) { return nmi(a, b); });
  m.def("ari", [](const std::vector<int>& a, const std::vector<int>& b) { return ari(a, b); });
  m.def(
      "f_measure",
      [](const std::vector<int>& truth, const std::vector<int>& predicted, double lambda) {
        return f_measure(truth, predicted, lambda);
      },
      py::arg("truth"), py::arg("predicted"), py::arg("lam") = 0.5);
  m.def(
      "kmeans",
      [](const Array& x, std::size_t k, std::uint64_t seed, std::size_t restarts) {
        return kmeans(to_dense(x), k, seed, restarts).labels;
      },
      py::arg("x"), py::arg("k"), py::arg("seed") = 42, py::arg("restarts") = 10);
  m.def(
      "lasso_fit",
      [](const Array& x, const Array& y, double penalty) {
        const auto fit = lasso_fit(to_dense(x), to_vector(y), penalty);
        return py::make_tuple(fit.weights, fit.intercept, fit.objective_trace);
      },
      py::arg("x"), py::arg("y"), py::arg("penalty"), "Returns (weights, intercept, objective trace).");

  m.def(
      "run_ablation_suite",
      [](const Dataset& d, const std::string& config, std::optional<std::size_t> k, std::size_t folds, double penalty,
         std::uint64_t seed, std::size_t threads) {
        const TrainConfig cfg = train_config_from_json(parse_config(config));
        EvalOptions opts{k, folds, penalty, seed};
        std::vector<AblationRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_ablation_suite(d, cfg, opts, threads);
        }
        return to_json(rows).dump();
      },
      py::arg("dataset"), py::arg("config") = "", py::arg("k") = py::none(), py::arg("folds") = 5,
      py::arg("penalty") = 0.1, py::arg("seed") = 42, py::arg("threads") = 1);

  m.def(
      "gradcheck",
      [](std::uint64_t seed) {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& r : gradcheck_suite(seed)) out.emplace_back(r.loss, r.max_rel_error);
        return out;
      },
      py::arg("seed") = 42, "Worst relative error per loss over five toy configurations.");
  m.def(
      "info_nce", [](const std::vector<double>& logits, std::size_t positives) { return info_nce(logits, positives).loss; },
      py::arg("logits"), py::arg("positives"));
}
