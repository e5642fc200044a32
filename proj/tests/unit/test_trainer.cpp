#include "doctest.h"
#include "helpers.hpp"

#include "augcl/checkpoint.hpp"
#include "augcl/config.hpp"
#include "augcl/errors.hpp"
#include "augcl/trainer.hpp"

using namespace augcl;
using namespace testutil;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.epochs = 3;
  c.batch_size = 8;
  c.hidden_dim = 8;
  c.hops = 2;
  c.seed = 5;
  return c;
}

std::map<std::string, std::vector<double>> snapshot(const ParameterSet& params) {
  std::map<std::string, std::vector<double>> out;
  for (auto& [name, t] : params) out[name].assign(t.data().begin(), t.data().end());
  return out;
}

const Dataset& small_dataset() {
  static Dataset ds = synthetic_graph_dataset(40, 5, 10, 2);
  return ds;
}

Dataset node_dataset() {
  Rng rng(3);
  Dataset ds;
  ds.name = "planted";
  ds.graphs.push_back(planted_partition_graph(15, 3, 0.3, 0.02, 0.2, rng));
  ds.num_classes = 3;
  ds.feature_dim = ds.graphs[0].feature_dim;
  return ds;
}

}  // namespace

TEST_CASE("train config validation names the field") {
  TrainConfig c;
  c.batch_size = 0;
  try {
    c.validate();
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "train.batch_size");
  }
  c = TrainConfig{};
  c.keep_ratio = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.alternation_prob = -0.1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("model groups and parameter count") {
  TrainConfig c = small_config();
  Model m(c, 3);
  CHECK(m.groups().size() == 5);
  std::size_t total = 0;
  for (auto& [name, g] : m.groups()) {
    CAPTURE(name);
    total += g.scalar_count();
    if (name != kGroupDiscriminator) CHECK(g.size() > 0);
  }
  CHECK(total == m.parameter_count());
  CHECK(m.group(kGroupDiscriminator).size() == 0);  // Dot has no parameters
  CHECK(m.active().size() == 5);
  c.task = TaskKind::Node;
  Model node(c, 3);
  CHECK(node.active().size() == 4);
  CHECK_FALSE(node.heads.has_subgraph());
}

TEST_CASE("forced coin leaves the other encoder bitwise unchanged") {
  TrainConfig c = small_config();
  c.objective.discriminator = DiscriminatorKind::Bilinear;
  TrainState state(c, small_dataset().feature_dim);
  auto batches = epoch_batches(small_dataset(), state);
  for (int step = 0; step < 6; ++step) {
    EncoderGroup forced = step % 2 ? EncoderGroup::Base : EncoderGroup::Augmentation;
    const char* frozen = forced == EncoderGroup::Base ? kGroupAugEncoder : kGroupBaseEncoder;
    const char* moving = forced == EncoderGroup::Base ? kGroupBaseEncoder : kGroupAugEncoder;
    auto before_frozen = snapshot(state.model.group(frozen));
    auto before_moving = snapshot(state.model.group(moving));
    auto before_disc = snapshot(state.model.group(kGroupDiscriminator));
    StepOutcome o = train_step(batches[step % batches.size()], state, forced);
    CHECK(o.coin == forced);
    CHECK(snapshot(state.model.group(frozen)) == before_frozen);
    if (o.grad_norms[moving] > 0) CHECK(snapshot(state.model.group(moving)) != before_moving);
    CHECK(snapshot(state.model.group(kGroupDiscriminator)) != before_disc);
  }
}

TEST_CASE("gradients reach every parameter group") {
  TrainConfig c = small_config();
  c.objective.discriminator = DiscriminatorKind::MLP;
  Model m(c, small_dataset().feature_dim);
  std::vector<Graph> graphs(small_dataset().graphs.begin(), small_dataset().graphs.begin() + 6);
  GraphBatch batch = batch_graphs(graphs);
  std::map<std::string, double> reached;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    ForwardResult r = forward_loss(m, batch, c, Rng(seed), true);
    m.zero_grad();
    r.loss.backward();
    for (auto& [name, g] : m.groups())
      for (auto& [pname, t] : g)
        for (double x : t.grad()) reached[name] += std::abs(x);
  }
  m.zero_grad();
  for (auto& [name, total] : reached) {
    CAPTURE(name);
    CHECK(total > 0);
  }
  CHECK(reached.size() == 5);
}

TEST_CASE("training is deterministic and epochs = 0 is a no-op") {
  TrainConfig c = small_config();
  auto [s1, log1] = train(small_dataset(), c);
  auto [s2, log2] = train(small_dataset(), c);
  CHECK(metrics_csv(log1) == metrics_csv(log2));
  CHECK(frequency_csv(log1) == frequency_csv(log2));
  CHECK(log1.epochs.size() == 3);
  for (auto& row : log1.steps) CHECK(std::isfinite(row.loss));
  for (auto& row : log1.epochs) {
    double total = 0;
    for (double f : row.frequency) total += f;
    CHECK(total == doctest::Approx(1.0));
  }

  c.epochs = 0;
  auto [s0, log0] = train(small_dataset(), c);
  CHECK(log0.steps.empty());
  CHECK(log0.epochs.empty());
  CHECK(s0.step == 0);
  TrainState fresh(c, small_dataset().feature_dim);
  for (auto& [name, g] : fresh.model.groups()) CHECK(snapshot(g) == snapshot(s0.model.group(name)));
}

TEST_CASE("save and resume match uninterrupted training") {
  TempDir tmp;
  TrainConfig c = small_config();
  c.epochs = 4;
  auto [full, full_log] = train(small_dataset(), c);

  TrainConfig half = c;
  half.epochs = 2;
  auto [partial, first_log] = train(small_dataset(), half);
  save_checkpoint(partial, tmp.path / "ckpt.bin");
  TrainState resumed = load_checkpoint(tmp.path / "ckpt.bin");
  CHECK(resumed.epoch == 2);
  CHECK(resumed.step == partial.step);
  resumed.config.epochs = 4;
  TrainLog rest = train(small_dataset(), resumed);
  REQUIRE(first_log.steps.size() + rest.steps.size() == full_log.steps.size());
  for (std::size_t i = 0; i < rest.steps.size(); ++i)
    CHECK(std::abs(rest.steps[i].loss - full_log.steps[first_log.steps.size() + i].loss) <= 1e-12);
  for (auto& [name, g] : full.model.groups()) CHECK(snapshot(g) == snapshot(resumed.model.group(name)));
}

TEST_CASE("checkpoint corruption is reported without partial state") {
  TempDir tmp;
  TrainConfig c = small_config();
  TrainState s(c, small_dataset().feature_dim);
  save_checkpoint(s, tmp.path / "ok.bin");
  std::string bytes = read_file(tmp.path / "ok.bin");
  std::string bad = bytes;
  bad[3] = '?';
  write_file(tmp.path / "bad.bin", bad);
  CHECK_THROWS_AS(load_checkpoint(tmp.path / "bad.bin"), CheckpointError);
  write_file(tmp.path / "short.bin", bytes.substr(0, 40));
  CHECK_THROWS_AS(load_checkpoint(tmp.path / "short.bin"), CheckpointError);

  Checkpoint partial = Checkpoint::load(tmp.path / "ok.bin");
  Checkpoint stripped;
  for (auto& [name, rec] : partial.records())
    if (name != "state/rng") {
      if (auto* t = std::get_if<Checkpoint::TensorRecord>(&rec)) stripped.put_tensor(name, t->shape, t->values);
      if (auto* u = std::get_if<std::vector<std::uint64_t>>(&rec)) stripped.put_u64(name, *u);
      if (auto* x = std::get_if<std::string>(&rec)) stripped.put_text(name, *x);
    }
  stripped.save(tmp.path / "stripped.bin");
  CHECK_THROWS_AS(load_checkpoint(tmp.path / "stripped.bin"), CheckpointError);
}

TEST_CASE("a non-finite loss aborts with diagnostics") {
  TrainConfig c = small_config();
  TrainState s(c, small_dataset().feature_dim);
  for (auto& [name, t] : s.model.group(kGroupBaseEncoder))
    for (auto& x : t.mutable_data()) x = std::numeric_limits<double>::quiet_NaN();
  auto batches = epoch_batches(small_dataset(), s);
  try {
    train_step(batches[0], s);
    FAIL("expected divergence");
  } catch (const TrainingDivergence& e) {
    std::string msg = e.what();
    CHECK(msg.find("step 0") != std::string::npos);
    CHECK(msg.find("aug_i=") != std::string::npos);
    CHECK(msg.find("head i:") != std::string::npos);
  }
  CHECK(s.step == 0);
}

TEST_CASE("epoch batches: shuffled, no singleton tail") {
  TrainConfig c = small_config();
  c.batch_size = 13;  // 40 = 13 + 13 + 13 + 1
  TrainState s(c, small_dataset().feature_dim);
  auto batches = epoch_batches(small_dataset(), s);
  CHECK(batches.size() == 3);
  for (auto& b : batches) CHECK(b.size() == 13);
}

TEST_CASE("node task trains on k-hop batches with four augmentations") {
  Dataset ds = node_dataset();
  TrainConfig c = small_config();
  c.task = TaskKind::Node;
  c.epochs = 2;
  c.node_batches_per_epoch = 3;
  auto [state, log] = train(ds, c);
  CHECK(log.steps.size() == 6);
  for (auto& row : log.steps) {
    CHECK(std::isfinite(row.loss));
    CHECK(row.aug_i != AugmentationKind::SubGraph);
    CHECK(row.aug_j != AugmentationKind::SubGraph);
  }
  CHECK(log.epochs[0].frequency[static_cast<int>(AugmentationKind::SubGraph)] == 0.0);
}

TEST_CASE("early stopping stops before the epoch budget") {
  TrainConfig c = small_config();
  c.epochs = 60;
  c.early_stop_patience = 1;
  auto [state, log] = train(small_dataset(), c);
  CHECK(log.early_stopped);
  CHECK(log.epochs.size() < 60);

  c.patience_unit = PatienceUnit::Steps;
  auto [s2, log2] = train(small_dataset(), c);
  CHECK(log2.early_stopped);
}
