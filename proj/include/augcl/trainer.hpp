#pragma once

#include <filesystem>
#include <array>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "augcl/encoder.hpp"
#include "augcl/heads.hpp"
#include "augcl/objective.hpp"
#include "augcl/policy.hpp"

namespace augcl {

enum class PatienceUnit { Epochs, Steps };

struct TrainConfig {
  TaskKind task = TaskKind::Graph;
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t hidden_dim = 32;
  int num_layers = 2;
  LayerKind layer_kind = LayerKind::GIN;  // graph tasks: both encoders
  Readout readout = Readout::Sum;
  PolicyKind policy_kind = PolicyKind::GRU;
  double head_temperature = 1.27;
  double policy_temperature = 1.27;
  double keep_ratio = 0.75;
  int hops = 5;
  double dropout = 0.1;
  std::uint64_t seed = 0;
  int early_stop_patience = 50;
  PatienceUnit patience_unit = PatienceUnit::Epochs;
  double alternation_prob = 0.5;
  double grad_clip = 5.0;  // global-norm clip; 0 disables
  int node_batches_per_epoch = 8;
  int base_layers = 2;  // node tasks only: depth of the GCN base encoder
  ObjectiveConfig objective;

  void validate() const;
};

/// Which encoder the per-step coin lets update.
enum class EncoderGroup { Base, Augmentation };
std::string_view group_name(EncoderGroup g);

/// Parameter groups, in the order they are checkpointed.
inline constexpr const char* kGroupAugEncoder = "aug_encoder";
inline constexpr const char* kGroupPolicy = "policy";
inline constexpr const char* kGroupHeads = "heads";
inline constexpr const char* kGroupBaseEncoder = "base_encoder";
inline constexpr const char* kGroupDiscriminator = "discriminator";

/// All learnable modules of the framework. Modules hold handles into the
/// group parameter sets, so a Model is move-only.
class Model {
 public:
  Model(const TrainConfig& config, std::size_t input_dim);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  std::map<std::string, ParameterSet>& groups() { return groups_; }
  const std::map<std::string, ParameterSet>& groups() const { return groups_; }
  ParameterSet& group(const std::string& name) { return groups_.at(name); }
  const ParameterSet& group(const std::string& name) const { return groups_.at(name); }
  std::size_t parameter_count() const;
  void zero_grad();

  std::size_t input_dim() const { return input_dim_; }
  const std::vector<AugmentationKind>& active() const { return active_; }

  GraphEncoder aug_encoder;
  GraphEncoder base_encoder;
  Policy policy;
  AugmentationHeads heads;
  Discriminator discriminator;

 private:
  std::map<std::string, ParameterSet> groups_;
  std::size_t input_dim_;
  std::vector<AugmentationKind> active_;
};

struct TrainState {
  TrainConfig config;
  Model model;
  std::map<std::string, AdamState> adam;
  std::uint64_t epoch = 0;
  std::uint64_t step = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  std::uint64_t stale = 0;  // evaluations since the last improvement
  Rng root;

  TrainState(const TrainConfig& config, std::size_t input_dim);
};

/// Everything the forward pass of one step produced.
struct ForwardResult {
  Tensor loss;
  PolicyDecision decision;
  std::vector<HeadOutput> views_i;
  std::vector<HeadOutput> views_j;
  Encodings augmentation;
};

/// Builds the loss of one batch without updating anything. All randomness
/// comes from `rng`; `training` enables dropout.
ForwardResult forward_loss(const Model& model, const GraphBatch& batch, const TrainConfig& config, Rng rng,
                           bool training = true);

struct StepOutcome {
  double loss = 0;
  PolicyDecision decision;
  EncoderGroup coin = EncoderGroup::Base;
  std::map<std::string, double> grad_norms;
};

/// One iteration: forward, backward, then Adam on the policy, heads and
/// discriminator plus exactly one of the two encoders.
EncoderConfig base_encoder_config(const TrainConfig& config, std::size_t input_dim);
EncoderConfig augmentation_encoder_config(const TrainConfig& config, std::size_t input_dim);

StepOutcome train_step(const GraphBatch& batch, TrainState& state, std::optional<EncoderGroup> forced_coin = {});

struct StepLogRow {
  std::uint64_t epoch, step;
  double loss;
  AugmentationKind aug_i, aug_j;
  double p_i, p_j;
  EncoderGroup coin;
};

struct EpochLogRow {
  std::uint64_t epoch;
  double mean_loss;
  std::array<double, kNumAugmentations> frequency;  // normalized selection counts
};

struct TrainLog {
  std::vector<StepLogRow> steps;
  std::vector<EpochLogRow> epochs;
  bool early_stopped = false;
};

using ProgressFn = std::function<void(const EpochLogRow&)>;

/// Runs epochs from `state.epoch` until `config.epochs` or early stopping.
TrainLog train(const Dataset& dataset, TrainState& state, const ProgressFn& progress = {});
/// Mini-batches of one epoch: shuffled graph batches, or sampled k-hop batches
/// for node tasks.
std::vector<GraphBatch> epoch_batches(const Dataset& dataset, const TrainState& state);

/// Fresh state from the config, then train.
std::pair<TrainState, TrainLog> train(const Dataset& dataset, const TrainConfig& config,
                                      const ProgressFn& progress = {});

std::string metrics_csv(const TrainLog& log);
std::string frequency_csv(const TrainLog& log);

void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace augcl
