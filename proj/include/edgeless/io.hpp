#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "edgeless/attributes.hpp"
#include "edgeless/graph.hpp"
#include "edgeless/matrix.hpp"
#include "edgeless/model.hpp"
#include "edgeless/sampling.hpp"
#include "edgeless/trainer.hpp"

namespace edgeless {

/// Loaded dataset restricted to its largest connected component, densely
/// remapped. `names` holds the original external ids of retained nodes.
struct DatasetBundle {
  Graph graph;
  AttributeMatrix attributes;
  std::vector<int> labels;  // empty when no label file given
  std::vector<std::string> names;
  int num_classes = 0;
};

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] inline void parse_error(const std::string& path, std::size_t line_no,
                                     const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace detail

/// Edge file: whitespace-separated id pairs, one per line. Attribute file:
/// either sparse triples `id feature value` or a `#dense <f>` header followed
/// by `id v1 ... vf` rows. Label file: `id class` pairs. Nodes present only
/// in the attribute file are kept as isolated nodes and then dropped by the
/// largest-connected-component restriction (with a warning).
inline DatasetBundle load_dataset(const std::string& edge_path, const std::string& attr_path,
                                  const std::optional<std::string>& label_path = std::nullopt,
                                  std::ostream* warn = &std::cerr) {
  std::unordered_map<std::string, NodeId> id_map;
  std::vector<std::string> names;
  auto intern = [&](const std::string& s) {
    auto [it, fresh] = id_map.try_emplace(s, static_cast<NodeId>(names.size()));
    if (fresh) names.push_back(s);
    return it->second;
  };

  std::ifstream ef(edge_path);
  if (!ef) throw std::runtime_error("cannot open edge file: " + edge_path);
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ef, line)) {
    ++line_no;
    auto toks = detail::tokenize(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) detail::parse_error(edge_path, line_no, "expected two ids");
    const NodeId u = intern(toks[0]);  // sequenced: argument evaluation order
    const NodeId v = intern(toks[1]);  // inside emplace_back is unspecified
    edges.emplace_back(u, v);
  }

  std::ifstream af(attr_path);
  if (!af) throw std::runtime_error("cannot open attribute file: " + attr_path);
  // collect rows keyed by node; feature dim discovered from the data
  std::unordered_map<NodeId, SparseRow> rows;
  std::size_t num_features = 0;
  bool dense = false;
  line_no = 0;
  while (std::getline(af, line)) {
    ++line_no;
    auto toks = detail::tokenize(line);
    if (toks.empty()) continue;
    if (line_no == 1 && toks[0] == "#dense") {
      if (toks.size() != 2) detail::parse_error(attr_path, line_no, "expected '#dense <f>'");
      dense = true;
      num_features = std::stoull(toks[1]);
      continue;
    }
    try {
      if (dense) {
        if (toks.size() != num_features + 1)
          detail::parse_error(attr_path, line_no, "wrong dense row width");
        NodeId v = intern(toks[0]);
        SparseRow row;
        for (std::size_t t = 1; t < toks.size(); ++t) {
          const double val = std::stod(toks[t]);
          if (val != 0.0) row.emplace_back(static_cast<std::uint32_t>(t - 1), val);
        }
        rows[v] = std::move(row);
      } else {
        if (toks.size() != 3) detail::parse_error(attr_path, line_no, "expected 'id feature value'");
        NodeId v = intern(toks[0]);
        const auto feat = static_cast<std::uint32_t>(std::stoul(toks[1]));
        const double val = std::stod(toks[2]);
        num_features = std::max(num_features, static_cast<std::size_t>(feat) + 1);
        rows[v].emplace_back(feat, val);
      }
    } catch (const std::invalid_argument&) {
      detail::parse_error(attr_path, line_no, "malformed number");
    }
  }

  std::vector<int> raw_labels;
  int num_classes = 0;
  if (label_path) {
    std::ifstream lf(*label_path);
    if (!lf) throw std::runtime_error("cannot open label file: " + *label_path);
    std::map<std::string, int> class_map;
    std::vector<std::pair<NodeId, std::string>> pairs;
    line_no = 0;
    while (std::getline(lf, line)) {
      ++line_no;
      auto toks = detail::tokenize(line);
      if (toks.empty()) continue;
      if (toks.size() != 2) detail::parse_error(*label_path, line_no, "expected 'id class'");
      pairs.emplace_back(intern(toks[0]), toks[1]);
      class_map.emplace(toks[1], 0);
    }
    int next = 0;
    for (auto& [k, v] : class_map) v = next++;
    num_classes = next;
    raw_labels.assign(names.size(), -1);
    for (auto& [v, cls] : pairs) raw_labels[v] = class_map[cls];
  }

  const std::size_t total_nodes = names.size();
  Graph full = Graph::from_edges(edges, total_nodes);
  auto [lcc, old_to_new] = largest_connected_component(full);
  std::size_t dropped = 0;
  for (NodeId v = 0; v < total_nodes; ++v)
    if (old_to_new[v] == kUnreachable) ++dropped;
  if (dropped > 0 && warn)
    *warn << "load_dataset: dropped " << dropped
          << " node(s) outside the largest connected component\n";

  DatasetBundle b;
  b.graph = std::move(lcc);
  b.attributes = AttributeMatrix(b.graph.num_nodes(), num_features);
  b.names.resize(b.graph.num_nodes());
  if (label_path) b.labels.assign(b.graph.num_nodes(), -1);
  b.num_classes = num_classes;
  for (NodeId v = 0; v < total_nodes; ++v) {
    const NodeId nv = old_to_new[v];
    if (nv == kUnreachable) continue;
    b.names[nv] = names[v];
    auto it = rows.find(v);
    if (it != rows.end()) b.attributes.set_row(nv, std::move(it->second));
    if (label_path) b.labels[nv] = raw_labels[v];
  }
  return b;
}

// ---- SplitSpec ----

inline void save_split(const SplitSpec& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write split file: " + path);
  f << "seed " << s.seed << "\n[train]\n";
  for (auto v : s.train_ids) f << v << "\n";
  f << "[val]\n";
  for (auto v : s.val_ids) f << v << "\n";
  f << "[test]\n";
  for (auto v : s.test_ids) f << v << "\n";
}

inline SplitSpec load_split(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open split file: " + path);
  SplitSpec s;
  std::vector<NodeId>* cur = nullptr;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line.rfind("seed ", 0) == 0) {
      s.seed = std::stoull(line.substr(5));
    } else if (line == "[train]") {
      cur = &s.train_ids;
    } else if (line == "[val]") {
      cur = &s.val_ids;
    } else if (line == "[test]") {
      cur = &s.test_ids;
    } else {
      if (!cur) throw std::runtime_error("split file: ids before section header");
      cur->push_back(static_cast<NodeId>(std::stoul(line)));
    }
  }
  return s;
}

// ---- checkpoint (binary, versioned) ----

namespace detail {

inline void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
    throw std::runtime_error("checkpoint: truncated file");
  return v;
}
inline void write_matrix(std::ostream& os, const Matrix& m) {
  write_u64(os, m.rows());
  write_u64(os, m.cols());
  os.write(reinterpret_cast<const char*>(m.data().data()),
           static_cast<std::streamsize>(m.size() * sizeof(double)));
}
inline Matrix read_matrix(std::istream& is) {
  const std::uint64_t r = read_u64(is), c = read_u64(is);
  Matrix m(r, c);
  if (!is.read(reinterpret_cast<char*>(m.data().data()),
               static_cast<std::streamsize>(m.size() * sizeof(double))))
    throw std::runtime_error("checkpoint: truncated matrix data");
  return m;
}

inline constexpr char kCheckpointMagic[8] = {'E', 'G', 'N', 'N', 'C', 'K', 'P', 'T'};
inline constexpr std::uint64_t kCheckpointVersion = 1;

}  // namespace detail

struct Checkpoint {
  ModelParams params;
  TrainConfig config;
  std::vector<EpochRecord> history;
};

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
  f.write(detail::kCheckpointMagic, 8);
  detail::write_u64(f, detail::kCheckpointVersion);
  const auto& p = ck.params;
  detail::write_u64(f, static_cast<std::uint64_t>(p.variant));
  detail::write_u64(f, p.input_dim);
  detail::write_u64(f, p.embedding_dim);
  detail::write_u64(f, p.hidden_dim);
  detail::write_u64(f, p.num_layers());
  for (auto a : p.activations) detail::write_u64(f, static_cast<std::uint64_t>(a));
  for (const auto& layer : p.layers) {
    detail::write_u64(f, layer.size());
    for (const auto& m : layer) detail::write_matrix(f, m);
  }
  const auto& c = ck.config;
  for (double v : {c.learning_rate, c.weight_decay, c.loss_params.alpha, c.loss_params.beta,
                   c.loss_params.gamma, c.loss_params.b})
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
  detail::write_u64(f, c.max_epochs);
  detail::write_u64(f, c.minibatch_size);
  detail::write_u64(f, c.patience);
  detail::write_u64(f, c.seed);
  detail::write_u64(f, ck.history.size());
  for (const auto& h : ck.history) {
    f.write(reinterpret_cast<const char*>(&h.train_loss), sizeof h.train_loss);
    f.write(reinterpret_cast<const char*>(&h.val_ap), sizeof h.val_ap);
  }
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  if (!f.read(magic, 8) || std::string(magic, 8) != std::string(detail::kCheckpointMagic, 8))
    throw std::runtime_error("checkpoint: bad magic");
  if (detail::read_u64(f) != detail::kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version");
  Checkpoint ck;
  auto& p = ck.params;
  p.variant = static_cast<GnnVariant>(detail::read_u64(f));
  p.input_dim = detail::read_u64(f);
  p.embedding_dim = detail::read_u64(f);
  p.hidden_dim = detail::read_u64(f);
  const std::uint64_t layers = detail::read_u64(f);
  for (std::uint64_t l = 0; l < layers; ++l)
    p.activations.push_back(static_cast<Activation>(detail::read_u64(f)));
  for (std::uint64_t l = 0; l < layers; ++l) {
    const std::uint64_t count = detail::read_u64(f);
    std::vector<Matrix> layer;
    for (std::uint64_t w = 0; w < count; ++w) layer.push_back(detail::read_matrix(f));
    p.layers.push_back(std::move(layer));
  }
  auto read_d = [&] {
    double v;
    if (!f.read(reinterpret_cast<char*>(&v), sizeof v))
      throw std::runtime_error("checkpoint: truncated config");
    return v;
  };
  auto& c = ck.config;
  c.learning_rate = read_d();
  c.weight_decay = read_d();
  c.loss_params.alpha = read_d();
  c.loss_params.beta = read_d();
  c.loss_params.gamma = read_d();
  c.loss_params.b = read_d();
  c.max_epochs = detail::read_u64(f);
  c.minibatch_size = detail::read_u64(f);
  c.patience = detail::read_u64(f);
  c.seed = detail::read_u64(f);
  const std::uint64_t hist = detail::read_u64(f);
  for (std::uint64_t i = 0; i < hist; ++i) {
    EpochRecord r;
    r.train_loss = read_d();
    r.val_ap = read_d();
    ck.history.push_back(r);
  }
  return ck;
}

// ---- embeddings ----

inline void save_embeddings_text(const Matrix& z, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write embeddings: " + path);
  f.precision(17);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    f << i;
    for (std::size_t t = 0; t < z.cols(); ++t) f << ' ' << z(i, t);
    f << '\n';
  }
}

inline Matrix load_embeddings_text(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open embeddings: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    auto toks = detail::tokenize(line);
    if (toks.empty()) continue;
    std::vector<double> row;
    for (std::size_t t = 1; t < toks.size(); ++t) row.push_back(std::stod(toks[t]));
    rows.push_back(std::move(row));
  }
  Matrix z(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t t = 0; t < rows[i].size(); ++t) z(i, t) = rows[i][t];
  return z;
}

inline void save_embeddings_binary(const Matrix& z, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write embeddings: " + path);
  f.write("EGNNEMB1", 8);
  detail::write_matrix(f, z);
}

inline Matrix load_embeddings_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open embeddings: " + path);
  char magic[8];
  if (!f.read(magic, 8) || std::string(magic, 8) != "EGNNEMB1")
    throw std::runtime_error("embeddings: bad magic");
  return detail::read_matrix(f);
}

// ---- run configuration and metric report ----

/// Flat key=value configuration. Unknown keys are rejected so typos fail
/// loudly; environment variables are never consulted.
struct RunConfig {
  std::string edges_path;
  std::string attrs_path;
  std::string labels_path;  // optional
  std::size_t k = 3;
  std::string variant = "sage";
  std::size_t dim = 64;
  std::size_t num_layers = 1;
  double split_train = 0.85;
  double split_val = 0.05;
  double split_test = 0.10;
  double mask_fraction = 0.0;
  std::uint64_t seed = 1;
  std::uint64_t eval_seed = 1;
  std::size_t kmeans_restarts = 5;
  double logistic_reg = 1e-4;
  TrainConfig train;

  static RunConfig from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    RunConfig c;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) detail::parse_error(path, line_no, "expected key=value");
      c.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return c;
  }

  void set(const std::string& key, const std::string& value) {
    if (key == "edges") edges_path = value;
    else if (key == "attrs") attrs_path = value;
    else if (key == "labels") labels_path = value;
    else if (key == "k") k = std::stoull(value);
    else if (key == "variant") variant = value;
    else if (key == "dim") dim = std::stoull(value);
    else if (key == "num_layers") num_layers = std::stoull(value);
    else if (key == "split_train") split_train = std::stod(value);
    else if (key == "split_val") split_val = std::stod(value);
    else if (key == "split_test") split_test = std::stod(value);
    else if (key == "mask_fraction") mask_fraction = std::stod(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "eval_seed") eval_seed = std::stoull(value);
    else if (key == "kmeans_restarts") kmeans_restarts = std::stoull(value);
    else if (key == "logistic_reg") logistic_reg = std::stod(value);
    else if (key == "learning_rate") train.learning_rate = std::stod(value);
    else if (key == "weight_decay") train.weight_decay = std::stod(value);
    else if (key == "max_epochs") train.max_epochs = std::stoull(value);
    else if (key == "minibatch_size") train.minibatch_size = std::stoull(value);
    else if (key == "patience") train.patience = std::stoull(value);
    else if (key == "alpha") train.loss_params.alpha = std::stod(value);
    else if (key == "beta") train.loss_params.beta = std::stod(value);
    else if (key == "gamma") train.loss_params.gamma = std::stod(value);
    else if (key == "b") train.loss_params.b = std::stod(value);
    else throw std::invalid_argument("unknown config key: " + key);
  }

  /// Canonical serialization: sorted key=value lines, so the hash is stable
  /// under field reordering in the source file.
  std::string canonical() const {
    std::map<std::string, std::string> kv;
    auto put_d = [&](const std::string& k2, double v) {
      std::ostringstream ss;
      ss.precision(17);
      ss << v;
      kv[k2] = ss.str();
    };
    kv["edges"] = edges_path;
    kv["attrs"] = attrs_path;
    kv["labels"] = labels_path;
    kv["k"] = std::to_string(k);
    kv["variant"] = variant;
    kv["dim"] = std::to_string(dim);
    kv["num_layers"] = std::to_string(num_layers);
    put_d("split_train", split_train);
    put_d("split_val", split_val);
    put_d("split_test", split_test);
    put_d("mask_fraction", mask_fraction);
    kv["seed"] = std::to_string(seed);
    kv["eval_seed"] = std::to_string(eval_seed);
    kv["kmeans_restarts"] = std::to_string(kmeans_restarts);
    put_d("logistic_reg", logistic_reg);
    put_d("learning_rate", train.learning_rate);
    put_d("weight_decay", train.weight_decay);
    kv["max_epochs"] = std::to_string(train.max_epochs);
    kv["minibatch_size"] = std::to_string(train.minibatch_size);
    kv["patience"] = std::to_string(train.patience);
    put_d("alpha", train.loss_params.alpha);
    put_d("beta", train.loss_params.beta);
    put_d("gamma", train.loss_params.gamma);
    put_d("b", train.loss_params.b);
    std::string out;
    for (const auto& [k2, v] : kv) out += k2 + "=" + v + "\n";
    return out;
  }

  std::string hash() const {
    // FNV-1a 64
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    std::ostringstream ss;
    ss << std::hex << h;
    return ss.str();
  }
};

struct MetricEntry {
  std::string task;
  std::string metric;
  double value;
};

inline void save_metric_report(const std::vector<MetricEntry>& entries, std::uint64_t seed,
                               const std::string& config_hash, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write report: " + path);
  f.precision(17);
  for (const auto& e : entries)
    f << "task=" << e.task << " metric=" << e.metric << " value=" << e.value << " seed=" << seed
      << " config=" << config_hash << "\n";
}

inline void print_metric_table(const std::vector<MetricEntry>& entries, std::ostream& os) {
  os << "task                 metric      value\n";
  for (const auto& e : entries) {
    os.precision(6);
    os << e.task;
    for (std::size_t i = e.task.size(); i < 21; ++i) os << ' ';
    os << e.metric;
    for (std::size_t i = e.metric.size(); i < 12; ++i) os << ' ';
    os << std::fixed << e.value << "\n";
    os.unsetf(std::ios::fixed);
  }
}

}  // namespace edgeless
