#include "augcl/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "augcl/checkpoint.hpp"
#include "augcl/errors.hpp"

namespace augcl {

Tensor Graph::feature_tensor() const {
  return Tensor::matrix(static_cast<std::size_t>(num_nodes), feature_dim, features);
}

Tensor Graph::weight_tensor() const { return Tensor::column(edge_weights); }

bool Graph::is_symmetric() const {
  std::set<Edge> set(edges.begin(), edges.end());
  return std::all_of(edges.begin(), edges.end(), [&](const Edge& e) { return set.count({e.dst, e.src}) > 0; });
}

bool Graph::has_edge(int src, int dst) const {
  return std::any_of(edges.begin(), edges.end(), [&](const Edge& e) { return e.src == src && e.dst == dst; });
}

void validate(const Graph& g) {
  AUGCL_REQUIRE(g.num_nodes >= 0, "graph has negative node count");
  AUGCL_REQUIRE(g.edge_weights.size() == g.edges.size(), "edge_weights length differs from edge count");
  AUGCL_REQUIRE(g.features.size() == static_cast<std::size_t>(g.num_nodes) * g.feature_dim,
                "feature matrix size differs from num_nodes x feature_dim");
  std::set<Edge> seen;
  for (auto& e : g.edges) {
    AUGCL_REQUIRE(e.src >= 0 && e.src < g.num_nodes && e.dst >= 0 && e.dst < g.num_nodes,
                  "edge endpoint out of range");
    AUGCL_REQUIRE(seen.insert(e).second, "duplicate edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) + ")");
  }
  AUGCL_REQUIRE(g.node_labels.empty() || g.node_labels.size() == static_cast<std::size_t>(g.num_nodes),
                "node_labels length differs from num_nodes");
}

Subgraph induced_subgraph(const Graph& g, std::vector<int> keep) {
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  Subgraph sub;
  sub.old_to_new.assign(g.num_nodes, -1);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    AUGCL_REQUIRE(keep[i] >= 0 && keep[i] < g.num_nodes, "induced_subgraph: node id out of range");
    sub.old_to_new[keep[i]] = static_cast<int>(i);
  }
  sub.new_to_old = keep;
  Graph& out = sub.graph;
  out.num_nodes = static_cast<int>(keep.size());
  out.feature_dim = g.feature_dim;
  out.label = g.label;
  out.features.reserve(keep.size() * g.feature_dim);
  for (int old : keep) {
    out.features.insert(out.features.end(), g.features.begin() + old * g.feature_dim,
                        g.features.begin() + (old + 1) * g.feature_dim);
    if (!g.node_labels.empty()) out.node_labels.push_back(g.node_labels[old]);
  }
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    int s = sub.old_to_new[g.edges[i].src];
    int d = sub.old_to_new[g.edges[i].dst];
    if (s < 0 || d < 0) continue;
    out.edges.push_back({s, d});
    out.edge_weights.push_back(g.edge_weights[i]);
    sub.edge_origin.push_back(static_cast<int>(i));
  }
  return sub;
}

Subgraph khop_bfs(const Graph& g, int center, int hops) {
  AUGCL_REQUIRE(center >= 0 && center < g.num_nodes, "khop_bfs: center out of range");
  AUGCL_REQUIRE(hops >= 0, "khop_bfs: hop count must be non-negative");
  std::vector<std::vector<int>> adj(g.num_nodes);
  for (auto& e : g.edges) adj[e.src].push_back(e.dst);
  std::vector<int> dist(g.num_nodes, -1);
  std::deque<int> queue{center};
  dist[center] = 0;
  std::vector<int> keep{center};
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    if (dist[u] == hops) continue;
    for (int v : adj[u]) {
      if (dist[v] >= 0) continue;
      dist[v] = dist[u] + 1;
      keep.push_back(v);
      queue.push_back(v);
    }
  }
  Subgraph sub = induced_subgraph(g, std::move(keep));
  sub.center = sub.old_to_new[center];
  return sub;
}

Tensor GraphBatch::feature_tensor() const {
  std::size_t dim = graphs.empty() ? 0 : graphs[0].feature_dim;
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(total_nodes) * dim);
  for (auto& g : graphs) data.insert(data.end(), g.features.begin(), g.features.end());
  return Tensor::matrix(static_cast<std::size_t>(total_nodes), dim, std::move(data));
}

Tensor GraphBatch::weight_tensor() const {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(total_edges));
  for (auto& g : graphs) data.insert(data.end(), g.edge_weights.begin(), g.edge_weights.end());
  return Tensor::column(std::move(data));
}

GraphBatch batch_graphs(std::vector<Graph> graphs) {
  AUGCL_REQUIRE(!graphs.empty(), "batch_graphs: empty graph list");
  GraphBatch b;
  std::size_t dim = graphs[0].feature_dim;
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const Graph& g = graphs[k];
    AUGCL_REQUIRE(g.feature_dim == dim, "batch_graphs: mixed feature dimensions");
    AUGCL_REQUIRE(g.num_nodes >= 1, "batch_graphs: graph without nodes");
    b.node_offsets.push_back(b.total_nodes);
    b.edge_offsets.push_back(b.total_edges);
    for (int v = 0; v < g.num_nodes; ++v) b.node_to_graph.push_back(static_cast<int>(k));
    for (auto& e : g.edges) {
      b.src.push_back(e.src + b.total_nodes);
      b.dst.push_back(e.dst + b.total_nodes);
    }
    b.total_nodes += g.num_nodes;
    b.total_edges += static_cast<int>(g.edges.size());
  }
  b.graphs = std::move(graphs);
  return b;
}

std::vector<Graph> unbatch(const GraphBatch& batch) {
  std::vector<Graph> out;
  auto features = batch.feature_tensor();
  auto weights = batch.weight_tensor();
  std::size_t dim = batch.graphs.empty() ? 0 : batch.graphs[0].feature_dim;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    Graph g;
    int n0 = batch.node_offsets[k];
    g.num_nodes = batch.graph_nodes(k);
    g.feature_dim = dim;
    g.label = batch.graphs[k].label;
    g.node_labels = batch.graphs[k].node_labels;
    g.features.assign(features.data().begin() + n0 * dim, features.data().begin() + (n0 + g.num_nodes) * dim);
    int e0 = batch.edge_offsets[k];
    int e1 = k + 1 < batch.size() ? batch.edge_offsets[k + 1] : batch.total_edges;
    for (int e = e0; e < e1; ++e) {
      g.edges.push_back({batch.src[e] - n0, batch.dst[e] - n0});
      g.edge_weights.push_back(weights[e]);
    }
    out.push_back(std::move(g));
  }
  return out;
}

GraphBatch make_node_task_batch(const Graph& g, int batch_size, int hops, std::uint64_t seed) {
  AUGCL_REQUIRE(batch_size >= 1, "make_node_task_batch: batch size must be >= 1");
  AUGCL_REQUIRE(g.num_nodes >= 1, "make_node_task_batch: empty graph");
  Rng rng(seed);
  std::vector<Graph> subs;
  std::vector<int> centers, locals;
  for (int b = 0; b < batch_size; ++b) {
    int c = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(g.num_nodes)));
    Subgraph s = khop_bfs(g, c, hops);
    centers.push_back(c);
    locals.push_back(s.center);
    subs.push_back(std::move(s.graph));
  }
  GraphBatch batch = batch_graphs(std::move(subs));
  batch.centers = std::move(centers);
  batch.center_locals = std::move(locals);
  return batch;
}

// ---- TUDataset ingestion ----

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot read dataset file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

std::vector<double> split_numbers(const std::string& line, const std::filesystem::path& file, std::size_t lineno) {
  std::vector<double> out;
  std::string tok;
  std::istringstream ss(line);
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
    } catch (const std::exception&) {
      throw CorruptDataset(file.filename().string() + ": line " + std::to_string(lineno + 1) + " is not numeric");
    }
  }
  return out;
}

long to_index(double v, const std::filesystem::path& file, std::size_t lineno) {
  if (v != static_cast<double>(static_cast<long>(v)))
    throw CorruptDataset(file.filename().string() + ": line " + std::to_string(lineno + 1) + " is not an integer");
  return static_cast<long>(v);
}

}  // namespace

void synthesize_degree_features(Graph& g) {
  std::vector<int> degree(g.num_nodes, 0);
  for (auto& e : g.edges) ++degree[e.src];
  g.feature_dim = kMaxDegreeFeature + 2;
  g.features.assign(static_cast<std::size_t>(g.num_nodes) * g.feature_dim, 0.0);
  for (int v = 0; v < g.num_nodes; ++v) {
    g.features[v * g.feature_dim + std::min(degree[v], kMaxDegreeFeature)] = 1.0;
    g.features[v * g.feature_dim + kMaxDegreeFeature + 1] = 1.0;
  }
}

Dataset parse_tudataset(const std::filesystem::path& directory, TaskKind task) {
  namespace fs = std::filesystem;
  fs::path dir = directory;
  if (dir.filename().empty()) dir = dir.parent_path();
  const std::string name = dir.filename().string();
  auto file = [&](const std::string& suffix) { return dir / (name + "_" + suffix + ".txt"); };

  for (const char* mandatory : {"A", "graph_indicator"})
    if (!fs::exists(file(mandatory))) throw IngestionError("missing mandatory file " + file(mandatory).string());

  // Node -> graph assignment (1-based in the file).
  auto indicator_lines = read_lines(file("graph_indicator"));
  std::vector<int> node_graph(indicator_lines.size());
  int num_graphs = 0;
  for (std::size_t i = 0; i < indicator_lines.size(); ++i) {
    long gid = to_index(split_numbers(indicator_lines[i], file("graph_indicator"), i).at(0), file("graph_indicator"), i);
    if (gid < 1) throw CorruptDataset("graph_indicator: graph id " + std::to_string(gid) + " at line " + std::to_string(i + 1));
    if (i > 0 && gid < node_graph[i - 1] + 1)
      throw CorruptDataset("graph_indicator: graph ids not non-decreasing at line " + std::to_string(i + 1));
    node_graph[i] = static_cast<int>(gid - 1);
    num_graphs = std::max(num_graphs, static_cast<int>(gid));
  }
  std::vector<int> first_node(num_graphs + 1, -1);
  std::vector<int> counts(num_graphs, 0);
  for (std::size_t i = 0; i < node_graph.size(); ++i) {
    if (first_node[node_graph[i]] < 0) first_node[node_graph[i]] = static_cast<int>(i);
    ++counts[node_graph[i]];
  }

  Dataset ds;
  ds.name = name;
  ds.graphs.resize(num_graphs);
  for (int k = 0; k < num_graphs; ++k) {
    if (counts[k] == 0) throw CorruptDataset("graph " + std::to_string(k + 1) + " has no nodes");
    ds.graphs[k].num_nodes = counts[k];
  }

  // Edges: "u, v" 1-based global ids.
  std::vector<std::set<Edge>> edge_sets(num_graphs);
  std::vector<std::vector<Edge>> edge_lists(num_graphs);
  auto adj_lines = read_lines(file("A"));
  for (std::size_t i = 0; i < adj_lines.size(); ++i) {
    auto nums = split_numbers(adj_lines[i], file("A"), i);
    if (nums.size() != 2) throw CorruptDataset(file("A").filename().string() + ": line " + std::to_string(i + 1) + " is not a pair");
    long u = to_index(nums[0], file("A"), i) - 1;
    long v = to_index(nums[1], file("A"), i) - 1;
    long n = static_cast<long>(node_graph.size());
    if (u < 0 || v < 0 || u >= n || v >= n) {
      long bad = (u < 0 || u >= n) ? u + 1 : v + 1;
      long known = (u >= 0 && u < n) ? u : ((v >= 0 && v < n) ? v : -1);
      std::string where = known >= 0 ? " in graph " + std::to_string(node_graph[known] + 1) : "";
      throw CorruptDataset("dangling node index " + std::to_string(bad) + where + " (A line " + std::to_string(i + 1) + ")");
    }
    int gu = node_graph[u], gv = node_graph[v];
    if (gu != gv)
      throw CorruptDataset("edge crosses graphs " + std::to_string(gu + 1) + " and " + std::to_string(gv + 1) +
                           " (A line " + std::to_string(i + 1) + ")");
    Edge e{static_cast<int>(u - first_node[gu]), static_cast<int>(v - first_node[gu])};
    if (edge_sets[gu].insert(e).second) {
      edge_lists[gu].push_back(e);
    } else {
      ++ds.duplicate_edges_dropped;
    }
  }
  for (int k = 0; k < num_graphs; ++k) {
    auto& set = edge_sets[k];
    auto& list = edge_lists[k];
    std::size_t original = list.size();
    for (std::size_t i = 0; i < original; ++i) {
      Edge rev{list[i].dst, list[i].src};
      if (set.insert(rev).second) list.push_back(rev);
    }
    std::sort(list.begin(), list.end());
    ds.graphs[k].edges = std::move(list);
    ds.graphs[k].edge_weights.assign(ds.graphs[k].edges.size(), 1.0);
  }
  if (ds.duplicate_edges_dropped > 0)
    std::cerr << "warning: " << name << ": collapsed " << ds.duplicate_edges_dropped << " duplicate edges\n";

  // Graph labels, remapped to 0..C-1 in ascending order of the raw value.
  if (fs::exists(file("graph_labels"))) {
    auto lines = read_lines(file("graph_labels"));
    if (static_cast<int>(lines.size()) != num_graphs)
      throw CorruptDataset("graph_labels has " + std::to_string(lines.size()) + " rows for " + std::to_string(num_graphs) +
                           " graphs");
    std::vector<long> raw(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) raw[i] = to_index(split_numbers(lines[i], file("graph_labels"), i).at(0), file("graph_labels"), i);
    std::map<long, int> remap;
    for (long r : raw) remap.emplace(r, 0);
    int c = 0;
    for (auto& [_, idx] : remap) idx = c++;
    for (int k = 0; k < num_graphs; ++k) ds.graphs[k].label = remap[raw[k]];
    ds.num_classes = c;
  }

  // Node labels: one-hot features (graph task) or targets (node task).
  std::vector<long> node_labels;
  long label_min = 0, label_max = -1;
  if (fs::exists(file("node_labels"))) {
    auto lines = read_lines(file("node_labels"));
    if (lines.size() != node_graph.size()) throw CorruptDataset("node_labels row count differs from graph_indicator");
    for (std::size_t i = 0; i < lines.size(); ++i)
      node_labels.push_back(to_index(split_numbers(lines[i], file("node_labels"), i).at(0), file("node_labels"), i));
    label_min = *std::min_element(node_labels.begin(), node_labels.end());
    label_max = *std::max_element(node_labels.begin(), node_labels.end());
  }
  std::vector<std::vector<double>> attributes;
  if (fs::exists(file("node_attributes"))) {
    auto lines = read_lines(file("node_attributes"));
    if (lines.size() != node_graph.size()) throw CorruptDataset("node_attributes row count differs from graph_indicator");
    for (std::size_t i = 0; i < lines.size(); ++i) attributes.push_back(split_numbers(lines[i], file("node_attributes"), i));
    for (auto& a : attributes)
      if (a.size() != attributes[0].size()) throw CorruptDataset("node_attributes rows have different widths");
  }

  std::size_t onehot_dim =
      (task == TaskKind::Graph && !node_labels.empty()) ? static_cast<std::size_t>(label_max - label_min + 1) : 0;
  std::size_t attr_dim = attributes.empty() ? 0 : attributes[0].size();
  std::size_t dim = onehot_dim + attr_dim;

  for (int k = 0; k < num_graphs; ++k) {
    Graph& g = ds.graphs[k];
    int base = first_node[k];
    if (dim == 0) {
      synthesize_degree_features(g);
      ds.synthesized_features = true;
    } else {
      g.feature_dim = dim;
      g.features.assign(static_cast<std::size_t>(g.num_nodes) * dim, 0.0);
      for (int v = 0; v < g.num_nodes; ++v) {
        if (onehot_dim) g.features[v * dim + (node_labels[base + v] - label_min)] = 1.0;
        for (std::size_t a = 0; a < attr_dim; ++a) g.features[v * dim + onehot_dim + a] = attributes[base + v][a];
      }
    }
    if (task == TaskKind::Node && !node_labels.empty()) {
      for (int v = 0; v < g.num_nodes; ++v) g.node_labels.push_back(static_cast<int>(node_labels[base + v] - label_min));
    }
  }
  if (task == TaskKind::Node && !node_labels.empty()) ds.num_classes = static_cast<int>(label_max - label_min + 1);
  ds.feature_dim = ds.graphs.empty() ? 0 : ds.graphs[0].feature_dim;
  return ds;
}

void write_tudataset(const Dataset& ds, const std::filesystem::path& directory) {
  namespace fs = std::filesystem;
  fs::path dir = directory;
  if (dir.filename().empty()) dir = dir.parent_path();
  fs::create_directories(dir);
  const std::string name = dir.filename().string();
  auto open = [&](const std::string& suffix) {
    std::ofstream out(dir / (name + "_" + suffix + ".txt"));
    if (!out) throw IngestionError("cannot write dataset file in " + dir.string());
    return out;
  };
  auto a = open("A");
  auto indicator = open("graph_indicator");
  bool graph_labels = std::all_of(ds.graphs.begin(), ds.graphs.end(), [](const Graph& g) { return g.label.has_value(); });
  bool node_labels = std::all_of(ds.graphs.begin(), ds.graphs.end(), [](const Graph& g) {
    return g.node_labels.size() == static_cast<std::size_t>(g.num_nodes);
  });
  bool attributes = ds.feature_dim > 0;
  std::ofstream labels, nodes, attrs;
  if (graph_labels) labels = open("graph_labels");
  if (node_labels) nodes = open("node_labels");
  if (attributes) attrs = open("node_attributes");
  attrs.precision(17);
  long offset = 1;
  for (std::size_t k = 0; k < ds.graphs.size(); ++k) {
    const Graph& g = ds.graphs[k];
    for (auto& e : g.edges) a << offset + e.src << ", " << offset + e.dst << '\n';
    for (int v = 0; v < g.num_nodes; ++v) {
      indicator << k + 1 << '\n';
      if (node_labels) nodes << g.node_labels[v] << '\n';
      if (attributes) {
        for (std::size_t d = 0; d < g.feature_dim; ++d) attrs << (d ? ", " : "") << g.feature(v, d);
        attrs << '\n';
      }
    }
    if (graph_labels) labels << *g.label << '\n';
    offset += g.num_nodes;
  }
}

std::size_t undirected_edge_count(const Graph& g) {
  std::set<std::pair<int, int>> pairs;
  for (auto& e : g.edges) pairs.insert({std::min(e.src, e.dst), std::max(e.src, e.dst)});
  return pairs.size();
}

DatasetStats dataset_stats(const Dataset& ds) {
  DatasetStats s;
  s.graphs = ds.graphs.size();
  s.feature_dim = ds.feature_dim;
  s.num_classes = ds.num_classes;
  if (ds.graphs.empty()) return s;
  double nodes = 0, edges = 0;
  for (auto& g : ds.graphs) {
    nodes += g.num_nodes;
    edges += static_cast<double>(undirected_edge_count(g));
  }
  s.mean_nodes = nodes / static_cast<double>(s.graphs);
  s.mean_edges = edges / static_cast<double>(s.graphs);
  return s;
}

void save_dataset_cache(const Dataset& ds, const std::filesystem::path& path) {
  Checkpoint ckpt;
  ckpt.put_text("dataset/name", ds.name);
  ckpt.put_u64("dataset/meta", {ds.graphs.size(), static_cast<std::uint64_t>(ds.num_classes), ds.feature_dim,
                                ds.duplicate_edges_dropped, ds.synthesized_features ? 1u : 0u});
  for (std::size_t k = 0; k < ds.graphs.size(); ++k) {
    const Graph& g = ds.graphs[k];
    std::string p = "graph/" + std::to_string(k) + "/";
    std::vector<std::uint64_t> meta{static_cast<std::uint64_t>(g.num_nodes), g.label.has_value() ? 1u : 0u,
                                    g.label.has_value() ? static_cast<std::uint64_t>(*g.label) : 0u};
    ckpt.put_u64(p + "meta", meta);
    std::vector<std::uint64_t> edges;
    for (auto& e : g.edges) {
      edges.push_back(static_cast<std::uint64_t>(e.src));
      edges.push_back(static_cast<std::uint64_t>(e.dst));
    }
    ckpt.put_u64(p + "edges", std::move(edges));
    ckpt.put_tensor(p + "weights", {g.edge_weights.size()}, g.edge_weights);
    ckpt.put_tensor(p + "features", {static_cast<std::size_t>(g.num_nodes), g.feature_dim}, g.features);
    ckpt.put_u64(p + "node_labels", {g.node_labels.begin(), g.node_labels.end()});
  }
  ckpt.save(path);
}

Dataset load_dataset_cache(const std::filesystem::path& path) {
  Checkpoint ckpt = Checkpoint::load(path);
  Dataset ds;
  ds.name = ckpt.text("dataset/name");
  const auto& meta = ckpt.u64("dataset/meta");
  if (meta.size() != 5) throw CheckpointError("dataset cache: bad metadata");
  ds.num_classes = static_cast<int>(meta[1]);
  ds.feature_dim = meta[2];
  ds.duplicate_edges_dropped = meta[3];
  ds.synthesized_features = meta[4] != 0;
  for (std::uint64_t k = 0; k < meta[0]; ++k) {
    std::string p = "graph/" + std::to_string(k) + "/";
    Graph g;
    const auto& gm = ckpt.u64(p + "meta");
    g.num_nodes = static_cast<int>(gm.at(0));
    if (gm.at(1)) g.label = static_cast<int>(gm.at(2));
    const auto& e = ckpt.u64(p + "edges");
    for (std::size_t i = 0; i + 1 < e.size(); i += 2) g.edges.push_back({static_cast<int>(e[i]), static_cast<int>(e[i + 1])});
    g.edge_weights = ckpt.tensor(p + "weights").values;
    const auto& f = ckpt.tensor(p + "features");
    g.feature_dim = f.shape.at(1);
    g.features = f.values;
    for (auto l : ckpt.u64(p + "node_labels")) g.node_labels.push_back(static_cast<int>(l));
    validate(g);
    ds.graphs.push_back(std::move(g));
  }
  return ds;
}

// ---- generators ----

Graph random_graph(int num_nodes, double edge_prob, std::size_t feature_dim, Rng& rng) {
  Graph g;
  g.num_nodes = num_nodes;
  g.feature_dim = feature_dim;
  g.features.resize(static_cast<std::size_t>(num_nodes) * feature_dim);
  for (auto& x : g.features) x = rng.uniform();
  for (int u = 0; u < num_nodes; ++u)
    for (int v = u + 1; v < num_nodes; ++v)
      if (rng.bernoulli(edge_prob)) {
        g.edges.push_back({u, v});
        g.edges.push_back({v, u});
      }
  std::sort(g.edges.begin(), g.edges.end());
  g.edge_weights.assign(g.edges.size(), 1.0);
  return g;
}

Graph planted_partition_graph(int nodes_per_block, int blocks, double p_in, double p_out, double feature_noise,
                              Rng& rng) {
  Graph g;
  g.num_nodes = nodes_per_block * blocks;
  g.feature_dim = static_cast<std::size_t>(blocks);
  for (int v = 0; v < g.num_nodes; ++v) g.node_labels.push_back(v / nodes_per_block);
  g.features.resize(static_cast<std::size_t>(g.num_nodes) * g.feature_dim);
  for (int v = 0; v < g.num_nodes; ++v)
    for (int b = 0; b < blocks; ++b)
      g.features[v * blocks + b] = (g.node_labels[v] == b ? 1.0 : 0.0) + feature_noise * rng.uniform(-1.0, 1.0);
  for (int u = 0; u < g.num_nodes; ++u)
    for (int v = u + 1; v < g.num_nodes; ++v)
      if (rng.bernoulli(g.node_labels[u] == g.node_labels[v] ? p_in : p_out)) {
        g.edges.push_back({u, v});
        g.edges.push_back({v, u});
      }
  std::sort(g.edges.begin(), g.edges.end());
  g.edge_weights.assign(g.edges.size(), 1.0);
  return g;
}

Dataset synthetic_graph_dataset(int num_graphs, int min_nodes, int max_nodes, std::uint64_t seed) {
  AUGCL_REQUIRE(min_nodes >= 3 && max_nodes >= min_nodes, "synthetic_graph_dataset: bad node range");
  Rng rng(seed);
  Dataset ds;
  ds.name = "synthetic";
  ds.num_classes = 2;
  ds.feature_dim = 3;
  for (int k = 0; k < num_graphs; ++k) {
    Graph g;
    int cls = k % 2;
    g.num_nodes = min_nodes + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(max_nodes - min_nodes + 1)));
    g.label = cls;
    std::set<Edge> edges;
    auto link = [&](int u, int v) {
      if (u == v) return;
      edges.insert({u, v});
      edges.insert({v, u});
    };
    for (int v = 0; v < g.num_nodes; ++v) link(v, (v + 1) % g.num_nodes);
    if (cls == 1)
      for (int c = 0; c < g.num_nodes / 3; ++c)
        link(static_cast<int>(rng.uniform_int(g.num_nodes)), static_cast<int>(rng.uniform_int(g.num_nodes)));
    g.edges.assign(edges.begin(), edges.end());
    g.edge_weights.assign(g.edges.size(), 1.0);
    g.feature_dim = 3;
    for (int v = 0; v < g.num_nodes; ++v) {
      int kind = cls == 0 ? (v % 2) : (v % 3 == 0 ? 2 : v % 2);
      for (int d = 0; d < 3; ++d) g.features.push_back(d == kind ? 1.0 : 0.0);
    }
    ds.graphs.push_back(std::move(g));
  }
  return ds;
}

}  // namespace augcl
