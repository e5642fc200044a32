#include "augcl/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "augcl/errors.hpp"

namespace augcl {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

int to_int32(const std::string& key, const std::string& v) {
  long long x = to_int(key, v);
  if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key, "integer out of range");
  return static_cast<int>(x);
}

template <typename E>
E to_enum(const std::string& key, const std::string& v, std::optional<E> parsed, const std::string& choices) {
  if (!parsed) throw ConfigError(key, "unknown value '" + v + "' (choices: " + choices + ")");
  return *parsed;
}

std::optional<TaskKind> parse_task(std::string_view s) {
  if (s == "graph") return TaskKind::Graph;
  if (s == "node") return TaskKind::Node;
  return std::nullopt;
}
std::string task_name(TaskKind t) { return t == TaskKind::Graph ? "graph" : "node"; }

std::optional<LayerKind> parse_layer(std::string_view s) {
  if (s == "gin") return LayerKind::GIN;
  if (s == "gcn") return LayerKind::GCN;
  return std::nullopt;
}
std::string layer_name(LayerKind k) { return k == LayerKind::GIN ? "gin" : "gcn"; }

std::optional<Readout> parse_readout(std::string_view s) {
  if (s == "sum") return Readout::Sum;
  if (s == "mean") return Readout::Mean;
  return std::nullopt;
}
std::string readout_name(Readout r) { return r == Readout::Sum ? "sum" : "mean"; }

std::optional<PatienceUnit> parse_unit(std::string_view s) {
  if (s == "epochs") return PatienceUnit::Epochs;
  if (s == "steps") return PatienceUnit::Steps;
  return std::nullopt;
}
std::string unit_name(PatienceUnit u) { return u == PatienceUnit::Epochs ? "epochs" : "steps"; }

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define AUGCL_FIELD_DOUBLE(name, member)                                                \
  Field{name, [](const RunConfig& c) { return fmt_double(c.member); },                  \
        [](RunConfig& c, const std::string& v) { c.member = to_double(name, v); }}
#define AUGCL_FIELD_INT(name, member)                                                   \
  Field{name, [](const RunConfig& c) { return std::to_string(c.member); },              \
        [](RunConfig& c, const std::string& v) { c.member = to_int32(name, v); }}
#define AUGCL_FIELD_U64(name, member)                                                   \
  Field{name, [](const RunConfig& c) { return std::to_string(c.member); },              \
        [](RunConfig& c, const std::string& v) { c.member = to_u64(name, v); }}
#define AUGCL_FIELD_SIZE(name, member)                                                  \
  Field{name, [](const RunConfig& c) { return std::to_string(c.member); },              \
        [](RunConfig& c, const std::string& v) { c.member = static_cast<std::size_t>(to_u64(name, v)); }}
#define AUGCL_FIELD_STRING(name, member)                                                \
  Field{name, [](const RunConfig& c) { return c.member; },                              \
        [](RunConfig& c, const std::string& v) { c.member = v; }}
#define AUGCL_FIELD_ENUM(name, member, printer, parser, choices)                        \
  Field{name, [](const RunConfig& c) { return std::string(printer(c.member)); },        \
        [](RunConfig& c, const std::string& v) { c.member = to_enum(name, v, parser(v), choices); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      AUGCL_FIELD_STRING("data.dataset", dataset),
      AUGCL_FIELD_ENUM("data.task", train.task, task_name, parse_task, "graph, node"),
      AUGCL_FIELD_STRING("output.dir", out_dir),
      AUGCL_FIELD_INT("train.epochs", train.epochs),
      AUGCL_FIELD_INT("train.batch_size", train.batch_size),
      AUGCL_FIELD_DOUBLE("train.learning_rate", train.learning_rate),
      AUGCL_FIELD_U64("train.seed", train.seed),
      AUGCL_FIELD_INT("train.early_stop_patience", train.early_stop_patience),
      AUGCL_FIELD_ENUM("train.patience_unit", train.patience_unit, unit_name, parse_unit, "epochs, steps"),
      AUGCL_FIELD_DOUBLE("train.alternation_prob", train.alternation_prob),
      AUGCL_FIELD_DOUBLE("train.grad_clip", train.grad_clip),
      AUGCL_FIELD_INT("train.node_batches_per_epoch", train.node_batches_per_epoch),
      AUGCL_FIELD_SIZE("model.hidden_dim", train.hidden_dim),
      AUGCL_FIELD_INT("model.num_layers", train.num_layers),
      AUGCL_FIELD_ENUM("model.layer_kind", train.layer_kind, layer_name, parse_layer, "gin, gcn"),
      AUGCL_FIELD_ENUM("model.readout", train.readout, readout_name, parse_readout, "sum, mean"),
      AUGCL_FIELD_DOUBLE("model.dropout", train.dropout),
      AUGCL_FIELD_INT("model.base_layers", train.base_layers),
      AUGCL_FIELD_ENUM("augment.policy", train.policy_kind, policy_name, parse_policy, "gru, deepset, random"),
      AUGCL_FIELD_DOUBLE("augment.policy_temperature", train.policy_temperature),
      AUGCL_FIELD_DOUBLE("augment.head_temperature", train.head_temperature),
      AUGCL_FIELD_DOUBLE("augment.keep_ratio", train.keep_ratio),
      AUGCL_FIELD_INT("augment.hops", train.hops),
      AUGCL_FIELD_ENUM("objective.estimator", train.objective.estimator, estimator_name, parse_estimator,
                       "jsd, nce, nt-xent, dv"),
      AUGCL_FIELD_ENUM("objective.discriminator", train.objective.discriminator, discriminator_name,
                       parse_discriminator, "dot, cosine, bilinear, mlp"),
      AUGCL_FIELD_DOUBLE("objective.nt_xent_temperature", train.objective.nt_xent_temperature),
      AUGCL_FIELD_INT("probe.folds", probe.folds),
      AUGCL_FIELD_INT("probe.runs", probe.runs),
      AUGCL_FIELD_INT("probe.node_runs", probe.node_runs),
      AUGCL_FIELD_DOUBLE("probe.train_frac", probe.train_frac),
      AUGCL_FIELD_U64("probe.seed", probe.seed),
      AUGCL_FIELD_STRING("inspect.head", inspect_head),
      AUGCL_FIELD_INT("inspect.count", inspect_count),
  };
  return table;
}

const Field& find_field(const std::string& key) {
  for (auto& f : fields())
    if (f.key == key) return f;
  throw ConfigError(key, "unknown configuration key");
}

bool is_train_section(const std::string& key) {
  return key.rfind("train.", 0) == 0 || key.rfind("model.", 0) == 0 || key.rfind("augment.", 0) == 0 ||
         key.rfind("objective.", 0) == 0 || key == "data.task";
}

std::string render(const RunConfig& c, bool train_only) {
  std::ostringstream out;
  std::string section;
  for (auto& f : fields()) {
    if (train_only && !is_train_section(f.key)) continue;
    auto dot = f.key.find('.');
    std::string sec = f.key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << f.key.substr(dot + 1) << " = " << f.get(c) << '\n';
  }
  return out.str();
}

}  // namespace

void RunConfig::validate(bool check_paths) const {
  train.validate();
  if (probe.folds < 2) throw ConfigError("probe.folds", "must be >= 2");
  if (probe.runs < 1) throw ConfigError("probe.runs", "must be >= 1");
  if (probe.node_runs < 1) throw ConfigError("probe.node_runs", "must be >= 1");
  if (!(probe.train_frac > 0 && probe.train_frac < 1)) throw ConfigError("probe.train_frac", "must be in (0, 1)");
  if (!parse_augmentation(inspect_head))
    throw ConfigError("inspect.head",
                      "unknown head '" + inspect_head + "' (choices: node_drop, edge_perturb, subgraph, feature_mask, identity)");
  if (inspect_count < 1) throw ConfigError("inspect.count", "must be >= 1");
  if (check_paths) {
    if (dataset.empty()) throw ConfigError("data.dataset", "no dataset directory given");
    if (!std::filesystem::is_directory(dataset))
      throw ConfigError("data.dataset", "dataset directory does not exist: " + dataset);
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (auto& f : fields()) out.push_back(f.key);
  return out;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  find_field(key).set(config, trim(value));
}

std::string get_config_value(const RunConfig& config, const std::string& key) { return find_field(key).get(config); }

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno), "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.find('.') == std::string::npos) {
      if (section.empty()) throw ConfigError(key, "key outside any section");
      key = section + "." + key;
    }
    set_config_value(base, key, line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string config_to_text(const RunConfig& config) { return render(config, false); }

std::string train_config_to_text(const TrainConfig& config) {
  RunConfig c;
  c.train = config;
  return render(c, true);
}

TrainConfig train_config_from_text(const std::string& text) { return parse_config(text).train; }

std::filesystem::path default_output_dir(const RunConfig& config) {
  const char* root = std::getenv(kOutputRootEnv);
  std::filesystem::path base = (root && *root) ? root : "runs";
  std::string name = std::filesystem::path(config.dataset).filename().string();
  if (name.empty()) name = std::filesystem::path(config.dataset).parent_path().filename().string();
  if (name.empty()) name = "run";
  return base / (name + "-seed" + std::to_string(config.train.seed));
}

}  // namespace augcl
