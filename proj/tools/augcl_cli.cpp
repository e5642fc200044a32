#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "augcl/checkpoint.hpp"
#include "augcl/config.hpp"
#include "augcl/errors.hpp"
#include "augcl/evaluation.hpp"
#include "augcl/trainer.hpp"

namespace fs = std::filesystem;
using namespace augcl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::string seed, out, dataset, task, policy, estimator, discriminator, epochs;
  bool print_config = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_file, "Config file (key = value with [sections])");
  cmd->add_option("--set", f.sets, "Override one field, e.g. --set train.batch_size=16")->take_all();
  cmd->add_option("--seed", f.seed, "train.seed");
  cmd->add_option("--out", f.out, "Output directory (default: $" + std::string(kOutputRootEnv) + "/<dataset>-seed<seed>)");
  cmd->add_option("--dataset", f.dataset, "TUDataset directory");
  cmd->add_option("--task", f.task, "graph or node");
  cmd->add_option("--policy", f.policy, "gru, deepset or random");
  cmd->add_option("--estimator", f.estimator, "jsd, nce, nt-xent or dv");
  cmd->add_option("--discriminator", f.discriminator, "dot, cosine, bilinear or mlp");
  cmd->add_option("--epochs", f.epochs, "train.epochs");
  cmd->add_flag("--print-config", f.print_config, "Print the resolved config and exit");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig c;
  if (!f.config_file.empty()) c = load_config(f.config_file);
  for (auto& s : f.sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(s, "--set expects key=value");
    set_config_value(c, s.substr(0, eq), s.substr(eq + 1));
  }
  auto flag = [&](const std::string& value, const char* key) {
    if (!value.empty()) set_config_value(c, key, value);
  };
  flag(f.seed, "train.seed");
  flag(f.out, "output.dir");
  flag(f.dataset, "data.dataset");
  flag(f.task, "data.task");
  flag(f.policy, "augment.policy");
  flag(f.estimator, "objective.estimator");
  flag(f.discriminator, "objective.discriminator");
  flag(f.epochs, "train.epochs");
  if (c.out_dir.empty()) c.out_dir = default_output_dir(c).string();
  return c;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Dataset load_dataset(const RunConfig& c) { return parse_tudataset(c.dataset, c.train.task); }

int cmd_train(const RunConfig& c, const std::string& resume) {
  Dataset ds = load_dataset(c);
  fs::create_directories(c.out_dir);
  write_file(fs::path(c.out_dir) / "config.cfg", config_to_text(c));
  std::cout << "dataset " << ds.name << ": " << ds.graphs.size() << " graphs, feature dim " << ds.feature_dim << '\n';

  auto t0 = std::chrono::steady_clock::now();
  auto progress = [&](const EpochLogRow& row) {
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "epoch " << row.epoch + 1 << "/" << c.train.epochs << "  loss " << row.mean_loss << "  ("
              << secs << " s)\n";
  };
  TrainState state = resume.empty() ? TrainState(c.train, ds.feature_dim) : load_checkpoint(resume);
  if (!resume.empty()) {
    if (state.model.input_dim() != ds.feature_dim)
      throw CheckpointError("checkpoint input dim " + std::to_string(state.model.input_dim()) +
                            " differs from dataset feature dim " + std::to_string(ds.feature_dim));
    state.config.epochs = c.train.epochs;
  }
  std::cout << "parameters: " << state.model.parameter_count() << '\n';
  TrainLog log = train(ds, state, progress);
  if (log.early_stopped) std::cout << "early stop after epoch " << state.epoch << '\n';

  save_checkpoint(state, fs::path(c.out_dir) / "checkpoint.bin");
  write_file(fs::path(c.out_dir) / "metrics.csv", metrics_csv(log));
  write_file(fs::path(c.out_dir) / "frequency.csv", frequency_csv(log));
  std::cout << "wrote " << c.out_dir << "/{checkpoint.bin,metrics.csv,frequency.csv,config.cfg}\n";
  return kExitOk;
}

TrainState load_compatible(const std::string& checkpoint, const Dataset& ds) {
  if (checkpoint.empty()) throw ConfigError("--checkpoint", "no checkpoint given");
  TrainState state = load_checkpoint(checkpoint);
  if (state.model.input_dim() != ds.feature_dim)
    throw InvalidShape("checkpoint expects feature dim " + std::to_string(state.model.input_dim()) +
                       " but dataset " + ds.name + " has " + std::to_string(ds.feature_dim));
  return state;
}

int cmd_embed(const RunConfig& c, const std::string& checkpoint) {
  Dataset ds = load_dataset(c);
  TrainState state = load_compatible(checkpoint, ds);
  EmbeddingTable table = embed_dataset(ds, state.model.base_encoder, c.train.task, c.train.hops);
  fs::create_directories(c.out_dir);
  write_file(fs::path(c.out_dir) / "embeddings.csv", embedding_table_csv(table));
  std::cout << "wrote " << table.rows() << " embeddings of dim " << table.dim << " to " << c.out_dir
            << "/embeddings.csv\n";
  return kExitOk;
}

int cmd_probe(const RunConfig& c, const std::string& checkpoint) {
  Dataset ds = load_dataset(c);
  TrainState state = load_compatible(checkpoint, ds);
  EmbeddingTable table = embed_dataset(ds, state.model.base_encoder, c.train.task, c.train.hops);
  table.checkpoint_id = checkpoint;
  ProbeReport report = c.train.task == TaskKind::Graph
                           ? linear_probe_graph(table, c.probe.folds, c.probe.runs, c.probe.seed)
                           : linear_probe_node(table, c.probe.node_runs, c.probe.train_frac, c.probe.seed);
  fs::create_directories(c.out_dir);
  write_file(fs::path(c.out_dir) / "probe_report.json", probe_report_json(report));
  write_file(fs::path(c.out_dir) / "probe_report.csv", probe_report_csv(report));
  std::cout << report.protocol << " probe: accuracy " << report.mean << " +- " << report.std << " over "
            << report.accuracies.size() << " evaluations (majority baseline " << report.majority_baseline << ")\n";
  return kExitOk;
}

int cmd_inspect(const RunConfig& c, const std::string& checkpoint) {
  auto kind = parse_augmentation(c.inspect_head);
  Dataset ds = load_dataset(c);
  TrainState state = load_compatible(checkpoint, ds);
  const Model& model = state.model;
  if (kind == AugmentationKind::SubGraph && !model.heads.has_subgraph())
    throw ConfigError("inspect.head", "the sub-graph head is not part of node-task models");

  GraphBatch batch;
  if (c.train.task == TaskKind::Graph) {
    std::vector<Graph> graphs;
    for (int k = 0; k < c.inspect_count && k < static_cast<int>(ds.graphs.size()); ++k) graphs.push_back(ds.graphs[k]);
    batch = batch_graphs(std::move(graphs));
  } else {
    batch = make_node_task_batch(ds.graphs.at(0), c.inspect_count, c.train.hops, c.train.seed);
  }
  Encodings enc = model.aug_encoder.encode(batch);
  Tensor dist = model.policy.distribution(enc.graph_matrix);

  fs::path dir = fs::path(c.out_dir) / "inspect";
  fs::create_directories(dir);
  std::ostringstream policy;
  policy << "augmentation,probability\n";
  double total = 0;
  for (std::size_t s = 0; s < model.active().size(); ++s) {
    policy << augmentation_name(model.active()[s]) << ',' << dist.at(0, s) << '\n';
    total += dist.at(0, s);
  }
  write_file(dir / "policy.csv", policy.str());
  std::cout << "policy distribution (sum " << total << "):\n" << policy.str();

  HeadSettings settings;
  settings.keep_ratio = c.train.keep_ratio;
  settings.hops = c.train.hops;
  settings.temperature = c.train.head_temperature;
  Rng rng = Rng(c.train.seed).split("inspect");
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const Graph& g = batch.graphs[k];
    Tensor nodes = slice_rows(enc.node_matrix, static_cast<std::size_t>(batch.node_offsets[k]),
                              static_cast<std::size_t>(g.num_nodes));
    Rng r = rng.split(static_cast<std::uint64_t>(k));
    HeadOutput view = model.heads.apply(*kind, g, nodes, slice_rows(enc.graph_matrix, k, 1), settings, r);
    std::ostringstream dump;
    dump << "# head " << c.inspect_head << ", input nodes " << g.num_nodes << ", input edges " << g.edges.size()
         << ", output nodes " << view.graph.num_nodes << "\n# kept_nodes";
    for (int v : view.kept_nodes) dump << ' ' << v;
    dump << "\nsrc,dst,weight\n";
    for (std::size_t e = 0; e < view.graph.edges.size(); ++e)
      dump << view.graph.edges[e].src << ',' << view.graph.edges[e].dst << ',' << view.graph.edge_weights[e] << '\n';
    write_file(dir / ("view_" + std::to_string(k) + ".csv"), dump.str());
  }
  std::cout << "wrote " << batch.size() << " views to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_stats(const RunConfig& c) {
  Dataset ds = load_dataset(c);
  DatasetStats s = dataset_stats(ds);
  std::cout << "dataset " << ds.name << "\ngraphs " << s.graphs << "\nclasses " << s.num_classes << "\nfeature_dim "
            << s.feature_dim << "\nmean_nodes " << s.mean_nodes << "\nmean_edges " << s.mean_edges
            << "\nduplicate_edges_dropped " << ds.duplicate_edges_dropped << "\nsynthesized_features "
            << (ds.synthesized_features ? "true" : "false") << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned graph augmentation for contrastive representation learning"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::string checkpoint, resume;

  auto* train_cmd = app.add_subcommand("train", "Train and write checkpoint, metrics and config snapshot");
  add_common(train_cmd, flags);
  train_cmd->add_option("--resume", resume, "Continue from a checkpoint");
  auto* embed_cmd = app.add_subcommand("embed", "Write frozen base-encoder embeddings");
  add_common(embed_cmd, flags);
  embed_cmd->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
  auto* probe_cmd = app.add_subcommand("probe", "Linear-probe evaluation of a checkpoint");
  add_common(probe_cmd, flags);
  probe_cmd->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
  std::string folds, runs, node_runs, train_frac;
  probe_cmd->add_option("--folds", folds, "probe.folds");
  probe_cmd->add_option("--runs", runs, "probe.runs");
  probe_cmd->add_option("--node-runs", node_runs, "probe.node_runs");
  probe_cmd->add_option("--train-frac", train_frac, "probe.train_frac");
  auto* inspect_cmd = app.add_subcommand("inspect", "Dump augmented views from one head");
  add_common(inspect_cmd, flags);
  inspect_cmd->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
  std::string head, count;
  inspect_cmd->add_option("--head", head, "node_drop, edge_perturb, subgraph, feature_mask or identity");
  inspect_cmd->add_option("-n,--count", count, "Number of graphs to augment");
  auto* stats_cmd = app.add_subcommand("stats", "Print dataset statistics");
  add_common(stats_cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig config = resolve(flags);
    auto flag = [&](const std::string& value, const char* key) {
      if (!value.empty()) set_config_value(config, key, value);
    };
    flag(folds, "probe.folds");
    flag(runs, "probe.runs");
    flag(node_runs, "probe.node_runs");
    flag(train_frac, "probe.train_frac");
    flag(head, "inspect.head");
    flag(count, "inspect.count");
    if (flags.print_config) {
      config.validate(false);
      std::cout << config_to_text(config);
      return kExitOk;
    }
    config.validate(true);
    if (*train_cmd) return cmd_train(config, resume);
    if (*embed_cmd) return cmd_embed(config, checkpoint);
    if (*probe_cmd) return cmd_probe(config, checkpoint);
    if (*inspect_cmd) return cmd_inspect(config, checkpoint);
    if (*stats_cmd) return cmd_stats(config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
