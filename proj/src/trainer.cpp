#include "augcl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "augcl/checkpoint.hpp"
#include "augcl/config.hpp"
#include "augcl/errors.hpp"

namespace augcl {

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("train.epochs", "must be >= 0");
  if (batch_size < 1) throw ConfigError("train.batch_size", "must be >= 1");
  if (!(learning_rate > 0)) throw ConfigError("train.learning_rate", "must be positive");
  if (hidden_dim < 1) throw ConfigError("model.hidden_dim", "must be >= 1");
  if (num_layers < 1) throw ConfigError("model.num_layers", "must be >= 1");
  if (base_layers < 1) throw ConfigError("model.base_layers", "must be >= 1");
  if (!(dropout >= 0 && dropout < 1)) throw ConfigError("model.dropout", "must be in [0, 1)");
  if (!(policy_temperature > 0)) throw ConfigError("augment.policy_temperature", "must be positive");
  if (!(head_temperature > 0)) throw ConfigError("augment.head_temperature", "must be positive");
  if (!(keep_ratio > 0 && keep_ratio <= 1)) throw ConfigError("augment.keep_ratio", "must be in (0, 1]");
  if (hops < 1) throw ConfigError("augment.hops", "must be >= 1");
  if (early_stop_patience < 1) throw ConfigError("train.early_stop_patience", "must be >= 1");
  if (!(alternation_prob >= 0 && alternation_prob <= 1))
    throw ConfigError("train.alternation_prob", "must be in [0, 1]");
  if (!(grad_clip >= 0)) throw ConfigError("train.grad_clip", "must be >= 0");
  if (node_batches_per_epoch < 1) throw ConfigError("train.node_batches_per_epoch", "must be >= 1");
  if (objective.estimator == Estimator::NTXent && !(objective.nt_xent_temperature > 0))
    throw ConfigError("objective.nt_xent_temperature", "must be positive");
}

std::string_view group_name(EncoderGroup g) { return g == EncoderGroup::Base ? "base" : "augmentation"; }

EncoderConfig augmentation_encoder_config(const TrainConfig& config, std::size_t input_dim) {
  EncoderConfig c;
  c.layer_kind = config.layer_kind;
  c.num_layers = config.num_layers;
  c.hidden_dim = config.hidden_dim;
  c.input_dim = input_dim;
  c.dropout = config.dropout;
  c.readout = config.readout;
  return c;
}

EncoderConfig base_encoder_config(const TrainConfig& config, std::size_t input_dim) {
  EncoderConfig c = augmentation_encoder_config(config, input_dim);
  if (config.task == TaskKind::Node) {
    c.layer_kind = LayerKind::GCN;
    c.num_layers = config.base_layers;
    c.readout = Readout::Mean;
  }
  return c;
}

Model::Model(const TrainConfig& config, std::size_t input_dim) : input_dim_(input_dim) {
  config.validate();
  AUGCL_REQUIRE(input_dim >= 1, "model: input dimension must be positive");
  bool node_task = config.task == TaskKind::Node;
  active_ = active_augmentations(node_task);
  for (auto name : {kGroupAugEncoder, kGroupPolicy, kGroupHeads, kGroupBaseEncoder, kGroupDiscriminator})
    groups_[name];
  aug_encoder = GraphEncoder(groups_[kGroupAugEncoder], kGroupAugEncoder,
                             augmentation_encoder_config(config, input_dim), config.seed);
  base_encoder = GraphEncoder(groups_[kGroupBaseEncoder], kGroupBaseEncoder, base_encoder_config(config, input_dim),
                              config.seed);
  policy = Policy(groups_[kGroupPolicy], kGroupPolicy, config.policy_kind, config.hidden_dim, active_.size(),
                  config.seed);
  heads = AugmentationHeads(groups_[kGroupHeads], kGroupHeads, config.hidden_dim, input_dim, !node_task, config.seed);
  discriminator = Discriminator(groups_[kGroupDiscriminator], kGroupDiscriminator, config.objective.discriminator,
                                config.hidden_dim, config.seed);
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (auto& [_, g] : groups_) n += g.scalar_count();
  return n;
}

void Model::zero_grad() {
  for (auto& [_, g] : groups_) g.zero_grad();
}

TrainState::TrainState(const TrainConfig& cfg, std::size_t input_dim)
    : config(cfg), model(cfg, input_dim), root(Rng(cfg.seed).split("train")) {
  for (auto& [name, _] : model.groups()) adam[name];
}

ForwardResult forward_loss(const Model& model, const GraphBatch& batch, const TrainConfig& config, Rng rng,
                           bool training) {
  AUGCL_REQUIRE(batch.size() >= 1, "forward_loss: empty batch");
  Rng aug_dropout = rng.split("aug_dropout");
  Rng base_dropout_i = rng.split("base_dropout_i");
  Rng base_dropout_j = rng.split("base_dropout_j");
  Rng policy_rng = rng.split("policy");
  Rng view_i_rng = rng.split("view_i");
  Rng view_j_rng = rng.split("view_j");

  ForwardResult out;
  out.augmentation = model.aug_encoder.encode(batch, batch.feature_tensor(), batch.weight_tensor(),
                                              training ? &aug_dropout : nullptr);
  out.decision = model.policy.decide(out.augmentation.graph_matrix, model.active(), config.policy_temperature,
                                     policy_rng);

  HeadSettings settings;
  settings.keep_ratio = config.keep_ratio;
  settings.hops = config.hops;
  settings.temperature = config.head_temperature;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const Graph& g = batch.graphs[k];
    Tensor nodes = slice_rows(out.augmentation.node_matrix, static_cast<std::size_t>(batch.node_offsets[k]),
                              static_cast<std::size_t>(g.num_nodes));
    Tensor graph = slice_rows(out.augmentation.graph_matrix, k, 1);
    Rng ri = view_i_rng.split(static_cast<std::uint64_t>(k));
    Rng rj = view_j_rng.split(static_cast<std::uint64_t>(k));
    out.views_i.push_back(model.heads.apply(out.decision.i, g, nodes, graph, settings, ri));
    out.views_j.push_back(model.heads.apply(out.decision.j, g, nodes, graph, settings, rj));
  }

  ViewBatch vi = batch_views(out.views_i);
  ViewBatch vj = batch_views(out.views_j);
  Encodings ei = model.base_encoder.encode(vi.structure, vi.features, vi.edge_weights,
                                           training ? &base_dropout_i : nullptr);
  Encodings ej = model.base_encoder.encode(vj.structure, vj.features, vj.edge_weights,
                                           training ? &base_dropout_j : nullptr);
  Tensor graphs_i = scale_by_policy(ei.graph_matrix, out.decision.p_i);
  Tensor graphs_j = scale_by_policy(ej.graph_matrix, out.decision.p_j);
  out.loss = batch_loss(ei.node_matrix, graphs_i, vi.structure, ej.node_matrix, graphs_j, vj.structure,
                        model.discriminator, config.objective);
  return out;
}

namespace {

std::string head_stats(const std::vector<HeadOutput>& views) {
  std::size_t nodes = 0, edges = 0, nonfinite = 0;
  for (auto& v : views) {
    nodes += static_cast<std::size_t>(v.graph.num_nodes);
    edges += v.graph.edges.size();
    for (double x : v.features.data()) nonfinite += std::isfinite(x) ? 0 : 1;
    for (double x : v.edge_weights.data()) nonfinite += std::isfinite(x) ? 0 : 1;
    for (auto& t : v.soft_params)
      for (double x : t.data()) nonfinite += std::isfinite(x) ? 0 : 1;
  }
  std::ostringstream s;
  s << "nodes=" << nodes << " edges=" << edges << " nonfinite_values=" << nonfinite;
  return s.str();
}

double squared_norm(const GradMap& grads) {
  double sq = 0;
  for (auto& [_, g] : grads)
    for (double x : g) sq += x * x;
  return sq;
}

}  // namespace

StepOutcome train_step(const GraphBatch& batch, TrainState& state, std::optional<EncoderGroup> forced_coin) {
  AUGCL_REQUIRE(batch.size() >= 1, "train_step: empty batch");
  const TrainConfig& config = state.config;
  Rng rng = state.root.split("step").split(state.step);
  Rng coin_rng = rng.split("coin");
  bool base = coin_rng.uniform() < config.alternation_prob;
  EncoderGroup coin = forced_coin ? *forced_coin : (base ? EncoderGroup::Base : EncoderGroup::Augmentation);

  ForwardResult fwd = forward_loss(state.model, batch, config, rng.split("forward"), true);
  double loss = fwd.loss.item();
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "non-finite loss at step " << state.step << " (epoch " << state.epoch << "): loss=" << loss
        << " aug_i=" << augmentation_name(fwd.decision.i) << " aug_j=" << augmentation_name(fwd.decision.j)
        << " p_i=" << fwd.decision.p_i.item() << " p_j=" << fwd.decision.p_j.item() << "; head i: "
        << head_stats(fwd.views_i) << "; head j: " << head_stats(fwd.views_j);
    throw TrainingDivergence(msg.str());
  }

  state.model.zero_grad();
  fwd.loss.backward();

  const std::string chosen = coin == EncoderGroup::Base ? kGroupBaseEncoder : kGroupAugEncoder;
  std::vector<std::string> updated = {kGroupPolicy, kGroupHeads, kGroupDiscriminator, chosen};
  std::map<std::string, GradMap> grads;
  StepOutcome outcome;
  double total_sq = 0;
  for (auto& [name, params] : state.model.groups()) {
    GradMap g;
    for (auto& [pname, t] : params) g[pname] = t.grad();
    double sq = squared_norm(g);
    outcome.grad_norms[name] = std::sqrt(sq);
    if (std::find(updated.begin(), updated.end(), name) != updated.end()) {
      total_sq += sq;
      grads[name] = std::move(g);
    }
  }
  double total = std::sqrt(total_sq);
  if (!std::isfinite(total)) {
    std::ostringstream msg;
    msg << "non-finite gradient at step " << state.step << ": aug_i=" << augmentation_name(fwd.decision.i)
        << " aug_j=" << augmentation_name(fwd.decision.j);
    for (auto& [name, n] : outcome.grad_norms) msg << ' ' << name << "_grad_norm=" << n;
    throw TrainingDivergence(msg.str());
  }
  if (config.grad_clip > 0 && total > config.grad_clip) {
    double scale = config.grad_clip / total;
    for (auto& [_, g] : grads)
      for (auto& [__, v] : g)
        for (double& x : v) x *= scale;
  }
  for (auto& name : updated)
    adam_step(state.model.group(name), grads[name], state.adam[name], config.learning_rate);
  state.model.zero_grad();

  ++state.step;
  outcome.loss = loss;
  outcome.decision = fwd.decision;
  outcome.coin = coin;
  return outcome;
}

std::vector<GraphBatch> epoch_batches(const Dataset& dataset, const TrainState& state) {
  AUGCL_REQUIRE(!dataset.graphs.empty(), "train: dataset is empty");
  const TrainConfig& config = state.config;
  std::vector<GraphBatch> batches;
  if (config.task == TaskKind::Node) {
    AUGCL_REQUIRE(dataset.graphs.size() == 1, "node task expects a dataset holding a single graph");
    Rng node_rng = state.root.split("node_batch").split(state.epoch);
    for (int b = 0; b < config.node_batches_per_epoch; ++b) {
      std::uint64_t seed = node_rng.split(static_cast<std::uint64_t>(b)).next_u64();
      batches.push_back(make_node_task_batch(dataset.graphs[0], config.batch_size, config.hops, seed));
    }
    return batches;
  }
  std::vector<int> order(dataset.graphs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng = state.root.split("epoch").split(state.epoch);
  shuffle_rng.shuffle(order);
  auto bs = static_cast<std::size_t>(config.batch_size);
  for (std::size_t start = 0; start < order.size(); start += bs) {
    std::size_t end = std::min(order.size(), start + bs);
    // A single leftover graph has no negatives; fold it out of the epoch.
    if (end - start == 1 && order.size() > 1) break;
    std::vector<Graph> graphs;
    for (std::size_t i = start; i < end; ++i) graphs.push_back(dataset.graphs[order[i]]);
    batches.push_back(batch_graphs(std::move(graphs)));
  }
  return batches;
}

TrainLog train(const Dataset& dataset, TrainState& state, const ProgressFn& progress) {
  const TrainConfig& config = state.config;
  TrainLog log;
  if (config.epochs == 0) return log;
  AUGCL_REQUIRE(!dataset.graphs.empty(), "train: dataset is empty");
  AUGCL_REQUIRE(dataset.feature_dim == state.model.input_dim(), "train: dataset feature dim differs from model");
  auto patience = static_cast<std::uint64_t>(config.early_stop_patience);
  auto observe = [&](double loss) {
    if (loss < state.best_loss) {
      state.best_loss = loss;
      state.stale = 0;
    } else {
      ++state.stale;
    }
    return state.stale >= patience;
  };

  while (state.epoch < static_cast<std::uint64_t>(config.epochs) && !log.early_stopped) {
    std::vector<GraphBatch> batches = epoch_batches(dataset, state);
    std::array<double, kNumAugmentations> counts{};
    double loss_sum = 0;
    std::size_t steps = 0;
    for (auto& batch : batches) {
      StepOutcome o = train_step(batch, state);
      log.steps.push_back({state.epoch, state.step - 1, o.loss, o.decision.i, o.decision.j, o.decision.p_i.item(),
                           o.decision.p_j.item(), o.coin});
      counts[static_cast<std::size_t>(o.decision.i)] += 1;
      counts[static_cast<std::size_t>(o.decision.j)] += 1;
      loss_sum += o.loss;
      ++steps;
      if (config.patience_unit == PatienceUnit::Steps && observe(o.loss)) {
        log.early_stopped = true;
        break;
      }
    }
    EpochLogRow row{state.epoch, steps ? loss_sum / static_cast<double>(steps) : 0.0, {}};
    for (std::size_t k = 0; k < kNumAugmentations; ++k) row.frequency[k] = steps ? counts[k] / (2.0 * steps) : 0.0;
    log.epochs.push_back(row);
    ++state.epoch;
    if (config.patience_unit == PatienceUnit::Epochs && observe(row.mean_loss)) log.early_stopped = true;
    if (progress) progress(row);
  }
  return log;
}

std::pair<TrainState, TrainLog> train(const Dataset& dataset, const TrainConfig& config, const ProgressFn& progress) {
  AUGCL_REQUIRE(!dataset.graphs.empty(), "train: dataset is empty");
  TrainState state(config, dataset.feature_dim);
  TrainLog log = train(dataset, state, progress);
  return {std::move(state), std::move(log)};
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string metrics_csv(const TrainLog& log) {
  std::ostringstream out;
  out << "epoch,step,loss,aug_i,aug_j,p_i,p_j,coin\n";
  for (auto& r : log.steps)
    out << r.epoch << ',' << r.step << ',' << fmt(r.loss) << ',' << augmentation_name(r.aug_i) << ','
        << augmentation_name(r.aug_j) << ',' << fmt(r.p_i) << ',' << fmt(r.p_j) << ',' << group_name(r.coin) << '\n';
  return out.str();
}

std::string frequency_csv(const TrainLog& log) {
  std::ostringstream out;
  out << "epoch,mean_loss";
  for (auto k : kAllAugmentations) out << ',' << augmentation_name(k);
  out << '\n';
  for (auto& r : log.epochs) {
    out << r.epoch << ',' << fmt(r.mean_loss);
    for (double f : r.frequency) out << ',' << fmt(f);
    out << '\n';
  }
  return out.str();
}

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  Checkpoint ckpt;
  ckpt.put_text("config", train_config_to_text(state.config));
  ckpt.put_u64("meta/input_dim", {state.model.input_dim()});
  ckpt.put_u64("state/counters", {state.epoch, state.step, state.stale});
  ckpt.put_tensor("state/best_loss", {1, 1}, {state.best_loss});
  ckpt.put_u64("state/rng", {state.root.key(), state.root.counter()});
  for (auto& [group, params] : state.model.groups()) {
    store_parameters(ckpt, params, "param/" + group + "/");
    const AdamState& adam = state.adam.at(group);
    ckpt.put_u64("adam/" + group + "/step", {adam.step});
    for (auto& [name, t] : params) {
      auto m = adam.m.find(name);
      if (m == adam.m.end()) continue;
      ckpt.put_tensor("adam/" + group + "/m/" + name, t.shape(), m->second);
      ckpt.put_tensor("adam/" + group + "/v/" + name, t.shape(), adam.v.at(name));
      ckpt.put_u64("adam/" + group + "/param_step/" + name, {adam.param_steps.at(name)});
    }
  }
  ckpt.save(path);
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  Checkpoint ckpt = Checkpoint::load(path);
  auto need = [&](const std::string& name) {
    if (!ckpt.has(name)) throw CheckpointError("checkpoint is missing record '" + name + "'");
  };
  for (auto name : {"config", "meta/input_dim", "state/counters", "state/best_loss", "state/rng"}) need(name);
  TrainConfig config;
  try {
    config = train_config_from_text(ckpt.text("config"));
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint config is invalid: ") + e.what());
  }
  const auto& dims = ckpt.u64("meta/input_dim");
  const auto& counters = ckpt.u64("state/counters");
  const auto& rng = ckpt.u64("state/rng");
  if (dims.size() != 1 || counters.size() != 3 || rng.size() != 2 || ckpt.tensor("state/best_loss").values.size() != 1)
    throw CheckpointError("checkpoint state records have unexpected sizes");

  TrainState state(config, static_cast<std::size_t>(dims[0]));
  for (auto& [group, params] : state.model.groups()) {
    restore_parameters(ckpt, params, "param/" + group + "/");
    AdamState& adam = state.adam[group];
    need("adam/" + group + "/step");
    adam.step = ckpt.u64("adam/" + group + "/step").at(0);
    for (auto& [name, t] : params) {
      std::string m = "adam/" + group + "/m/" + name;
      if (!ckpt.has(m)) continue;
      std::string v = "adam/" + group + "/v/" + name, s = "adam/" + group + "/param_step/" + name;
      need(v);
      need(s);
      const auto& mr = ckpt.tensor(m);
      const auto& vr = ckpt.tensor(v);
      if (mr.values.size() != t.numel() || vr.values.size() != t.numel())
        throw CheckpointError("optimizer moments for " + group + "/" + name + " have the wrong size");
      adam.m[name] = mr.values;
      adam.v[name] = vr.values;
      adam.param_steps[name] = ckpt.u64(s).at(0);
    }
  }
  state.epoch = counters[0];
  state.step = counters[1];
  state.stale = counters[2];
  state.best_loss = ckpt.tensor("state/best_loss").values[0];
  state.root = Rng::from_state(rng[0], rng[1]);
  return state;
}

}  // namespace augcl
