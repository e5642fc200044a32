#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "augcl/config.hpp"
#include "augcl/errors.hpp"
#include "augcl/evaluation.hpp"
#include "augcl/graph.hpp"
#include "augcl/trainer.hpp"

namespace py = pybind11;
using namespace augcl;

namespace {

TaskKind task_from(const std::string& name) {
  if (name == "graph") return TaskKind::Graph;
  if (name == "node") return TaskKind::Node;
  throw ConfigError("data.task", "expected graph or node, got " + name);
}

py::array_t<double> matrix(const std::vector<double>& values, std::size_t rows, std::size_t cols) {
  py::array_t<double> out({rows, cols});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

RunConfig config_from(const std::map<std::string, std::string>& overrides) {
  RunConfig c;
  for (auto& [key, value] : overrides) set_config_value(c, key, value);
  c.train.validate();
  return c;
}

py::dict graph_dict(const Graph& g) {
  py::dict d;
  d["num_nodes"] = g.num_nodes;
  py::array_t<int> edges({g.edges.size(), std::size_t{2}});
  auto e = edges.mutable_unchecked<2>();
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    e(i, 0) = g.edges[i].src;
    e(i, 1) = g.edges[i].dst;
  }
  d["edges"] = edges;
  d["edge_weights"] = py::array_t<double>(g.edge_weights.size(), g.edge_weights.data());
  d["features"] = matrix(g.features, static_cast<std::size_t>(g.num_nodes), g.feature_dim);
  d["label"] = g.label;
  d["node_labels"] = g.node_labels;
  return d;
}

py::dict embeddings_dict(const EmbeddingTable& t) {
  py::dict d;
  d["embeddings"] = matrix(t.values, t.rows(), t.dim);
  d["labels"] = py::array_t<int>(t.labels.size(), t.labels.data());
  return d;
}

py::dict report_dict(const ProbeReport& r) {
  py::dict d;
  d["protocol"] = r.protocol;
  d["mean"] = r.mean;
  d["std"] = r.std;
  d["accuracies"] = r.accuracies;
  d["lambdas"] = r.lambdas;
  d["majority_baseline"] = r.majority_baseline;
  return d;
}

EmbeddingTable table_from(py::array_t<double, py::array::c_style | py::array::forcecast> x,
                          const std::vector<int>& labels) {
  if (x.ndim() != 2) throw InvalidShape("embeddings must be a 2-d array");
  if (static_cast<std::size_t>(x.shape(0)) != labels.size())
    throw InvalidShape("embeddings and labels disagree on the row count");
  EmbeddingTable t;
  t.dim = static_cast<std::size_t>(x.shape(1));
  t.values.assign(x.data(), x.data() + x.size());
  t.labels = labels;
  return t;
}

}  // namespace

PYBIND11_MODULE(_augcl, m) {
  m.doc() = "Learned graph augmentation for contrastive representation learning";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);
  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<IngestionError>(m, "IngestionError", PyExc_IOError);

  py::class_<Dataset, std::shared_ptr<Dataset>>(m, "Dataset")
      .def_readonly("name", &Dataset::name)
      .def_readonly("num_classes", &Dataset::num_classes)
      .def_readonly("feature_dim", &Dataset::feature_dim)
      .def("__len__", [](const Dataset& d) { return d.graphs.size(); })
      .def(
          "graph",
          [](const Dataset& d, std::size_t i) {
            if (i >= d.graphs.size()) throw py::index_error("graph index out of range");
            return graph_dict(d.graphs[i]);
          },
          py::arg("index"))
      .def("stats", [](const Dataset& d) {
        DatasetStats s = dataset_stats(d);
        py::dict out;
        out["graphs"] = s.graphs;
        out["classes"] = s.num_classes;
        out["feature_dim"] = s.feature_dim;
        out["mean_nodes"] = s.mean_nodes;
        out["mean_edges"] = s.mean_edges;
        return out;
      });

  m.def(
      "load_dataset",
      [](const std::filesystem::path& directory, const std::string& task) {
        return std::make_shared<Dataset>(parse_tudataset(directory, task_from(task)));
      },
      py::arg("directory"), py::arg("task") = "graph", "Parse a TUDataset-format directory.");

  m.def("config_keys", &config_keys, "All configurable 'section.key' names.");
  m.def(
      "default_config",
      [](const std::map<std::string, std::string>& overrides) { return config_to_text(config_from(overrides)); },
      py::arg("overrides") = std::map<std::string, std::string>{}, "Resolved config text.");

  py::class_<TrainState, std::shared_ptr<TrainState>>(m, "Model")
      .def_property_readonly("epoch", [](const TrainState& s) { return s.epoch; })
      .def_property_readonly("step", [](const TrainState& s) { return s.step; })
      .def_property_readonly("parameter_count", [](const TrainState& s) { return s.model.parameter_count(); })
      .def_property_readonly("config", [](const TrainState& s) { return train_config_to_text(s.config); })
      .def(
          "save", [](const TrainState& s, const std::filesystem::path& path) { save_checkpoint(s, path); },
          py::arg("path"))
      .def(
          "embed",
          [](const TrainState& s, const Dataset& d) {
            if (s.model.input_dim() != d.feature_dim) throw InvalidShape("model and dataset feature dims differ");
            return embeddings_dict(embed_dataset(d, s.model.base_encoder, s.config.task, s.config.hops));
          },
          py::arg("dataset"), "Frozen base-encoder embeddings and labels.");

  m.def(
      "load_model", [](const std::filesystem::path& path) { return std::make_shared<TrainState>(load_checkpoint(path)); },
      py::arg("path"));

  m.def(
      "train",
      [](const Dataset& d, const std::map<std::string, std::string>& overrides) {
        RunConfig c = config_from(overrides);
        std::pair<TrainState, TrainLog> result = [&] {
          py::gil_scoped_release release;
          return train(d, c.train);
        }();
        py::list epochs;
        for (auto& row : result.second.epochs) epochs.append(row.mean_loss);
        py::dict out;
        out["model"] = std::make_shared<TrainState>(std::move(result.first));
        out["epoch_losses"] = epochs;
        out["metrics_csv"] = metrics_csv(result.second);
        out["frequency_csv"] = frequency_csv(result.second);
        out["early_stopped"] = result.second.early_stopped;
        return out;
      },
      py::arg("dataset"), py::arg("overrides") = std::map<std::string, std::string>{},
      "Train from fresh parameters; overrides use 'section.key' names.");

  m.def(
      "linear_probe",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> x, const std::vector<int>& labels,
         const std::string& protocol, int folds, int runs, double train_frac, std::uint64_t seed) {
        EmbeddingTable t = table_from(x, labels);
        if (protocol == "graph") return report_dict(linear_probe_graph(t, folds, runs, seed));
        if (protocol == "node") return report_dict(linear_probe_node(t, runs, train_frac, seed));
        throw ConfigError("protocol", "expected graph or node");
      },
      py::arg("embeddings"), py::arg("labels"), py::arg("protocol") = "graph", py::arg("folds") = 10,
      py::arg("runs") = 1, py::arg("train_frac") = 0.8, py::arg("seed") = 0,
      "Linear-probe accuracy. Graph protocol: folds x runs CV; node protocol: `runs` random splits.");
}
