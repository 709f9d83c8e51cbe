#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "edgeless/inference.hpp"
#include "edgeless/io.hpp"
#include "edgeless/knn.hpp"
#include "edgeless/metrics.hpp"
#include "edgeless/sampling.hpp"
#include "edgeless/trainer.hpp"

namespace edgeless {

/// Edgeless-node ids (val then test) in original graph ids; these are the
/// rows appended after the training nodes in every X_all / Z_all ordering.
inline std::vector<NodeId> edgeless_ids_of(const SplitSpec& split) {
  std::vector<NodeId> out = split.val_ids;
  out.insert(out.end(), split.test_ids.begin(), split.test_ids.end());
  return out;
}

/// Maps original node ids to Z_all row indices: training nodes first in
/// split order, then val, then test.
inline std::vector<NodeId> zall_row_of(const SplitSpec& split, std::size_t num_nodes) {
  std::vector<NodeId> map(num_nodes, kUnreachable);
  NodeId next = 0;
  for (auto v : split.train_ids) map[v] = next++;
  for (auto v : split.val_ids) map[v] = next++;
  for (auto v : split.test_ids) map[v] = next++;
  return map;
}

struct TrainedPipeline {
  SplitSpec split;
  EdgelessScenario scenario;
  Graph g_knn;
  TrainResult result;
};

/// Validation probe: link-prediction AP over the hidden edges that live
/// inside train+val, scored on an inference pass extended with the val nodes.
inline ValProbe make_val_probe(const DatasetBundle& bundle, const AttributeMatrix& attrs,
                               const SplitSpec& split, const EdgelessScenario& scenario,
                               const Graph& g_knn, const AttributeMatrix& x_train, std::size_t k,
                               std::uint64_t eval_seed) {
  std::vector<char> in_val(bundle.graph.num_nodes(), 0), in_test(bundle.graph.num_nodes(), 0);
  for (auto v : split.val_ids) in_val[v] = 1;
  for (auto v : split.test_ids) in_test[v] = 1;
  std::vector<std::pair<NodeId, NodeId>> val_edges;
  for (auto [u, v] : scenario.hidden_edges)
    if ((in_val[u] || in_val[v]) && !in_test[u] && !in_test[v]) val_edges.emplace_back(u, v);
  if (val_edges.empty()) return nullptr;

  // row map over train+val inference ordering
  std::vector<NodeId> row(bundle.graph.num_nodes(), kUnreachable);
  NodeId next = 0;
  for (auto v : split.train_ids) row[v] = next++;
  for (auto v : split.val_ids) row[v] = next++;

  // negatives drawn within train+val only: test nodes have no row yet
  std::vector<NodeId> pool = split.train_ids;
  pool.insert(pool.end(), split.val_ids.begin(), split.val_ids.end());
  ScoredPairs eval = build_lp_eval_set(val_edges, bundle.graph, split.val_ids, eval_seed, &pool);
  std::vector<std::pair<NodeId, NodeId>> rows;
  for (auto [u, v] : eval.pairs) rows.emplace_back(row[u], row[v]);
  AttributeMatrix x_val = attrs.select_rows(split.val_ids);
  Graph g_all = extend_knng(g_knn, x_train, x_val, k);
  AttributeMatrix x_all = x_train.concat_rows(x_val);

  return [g_all = std::move(g_all), x_all = std::move(x_all), rows = std::move(rows),
          labels = eval.labels](const ModelParams& p) {
    Matrix z = infer_all(p, g_all, x_all);
    return average_precision(score_links(z, rows), labels);
  };
}

/// Full training phase: split, manufacture the edgeless scenario, build the
/// attribute kNN computation graph over training nodes, train.
inline TrainedPipeline run_training(const RunConfig& cfg, const DatasetBundle& bundle,
                                    std::ostream* progress = nullptr) {
  TrainedPipeline out;
  AttributeMatrix attrs = cfg.mask_fraction > 0.0
                              ? mask_attributes(bundle.attributes, cfg.mask_fraction, cfg.seed)
                              : bundle.attributes;
  out.split = split_nodes(bundle.graph.num_nodes(), cfg.split_train, cfg.split_val, cfg.split_test,
                          cfg.seed);
  out.scenario = make_edgeless_scenario(bundle.graph, out.split);
  AttributeMatrix x_train = attrs.select_rows(out.split.train_ids);
  out.g_knn = build_knng(x_train, cfg.k);

  ModelParams params = init_params(variant_from_name(cfg.variant), attrs.num_features(), cfg.dim,
                                   cfg.seed, cfg.num_layers);
  ValProbe probe = make_val_probe(bundle, attrs, out.split, out.scenario, out.g_knn, x_train,
                                  cfg.k, cfg.eval_seed);
  out.result = train(cfg.train, std::move(params), out.scenario.g_train, out.g_knn, x_train, probe,
                     progress);
  return out;
}

struct InferenceOutput {
  Matrix z_all;       // train rows first, then edgeless (val then test)
  Matrix z_edgeless;  // edgeless rows only
};

/// Inference phase: extend the computation graph with the edgeless nodes and
/// run one forward pass.
inline InferenceOutput run_inference(const RunConfig& cfg, const ModelParams& params,
                                     const DatasetBundle& bundle, const SplitSpec& split) {
  AttributeMatrix attrs = cfg.mask_fraction > 0.0
                              ? mask_attributes(bundle.attributes, cfg.mask_fraction, cfg.seed)
                              : bundle.attributes;
  AttributeMatrix x_train = attrs.select_rows(split.train_ids);
  AttributeMatrix x_new = attrs.select_rows(edgeless_ids_of(split));
  Graph g_knn = build_knng(x_train, cfg.k);
  Graph g_knn_all = extend_knng(g_knn, x_train, x_new, cfg.k);
  InferenceOutput out;
  out.z_all = infer_all(params, g_knn_all, x_train.concat_rows(x_new));
  out.z_edgeless = select_edgeless(out.z_all, split.train_ids.size());
  return out;
}

/// Downstream evaluation on Z_all rows (training-node rows for fitting, the
/// edgeless rows as targets). `tasks` selects from {"lp", "cls", "cluster"}.
inline std::vector<MetricEntry> run_evaluation(const RunConfig& cfg, const Matrix& z_all,
                                               const DatasetBundle& bundle, const SplitSpec& split,
                                               const std::vector<std::string>& tasks,
                                               const std::string& task_prefix = "") {
  std::vector<MetricEntry> entries;
  auto row = zall_row_of(split, bundle.graph.num_nodes());
  auto edgeless = edgeless_ids_of(split);
  auto scenario = make_edgeless_scenario(bundle.graph, split);

  auto wants = [&](const std::string& t) {
    for (const auto& s : tasks)
      if (s == t) return true;
    return false;
  };

  if (wants("lp")) {
    if (scenario.hidden_edges.empty())
      throw std::runtime_error("eval: no hidden edges for link prediction");
    ScoredPairs eval = build_lp_eval_set(scenario.hidden_edges, bundle.graph, edgeless,
                                         cfg.eval_seed);
    std::vector<std::pair<NodeId, NodeId>> rows;
    for (auto [u, v] : eval.pairs) rows.emplace_back(row[u], row[v]);
    auto scores = score_links(z_all, rows);
    entries.push_back({task_prefix + "link_prediction", "ap", average_precision(scores, eval.labels)});
    entries.push_back({task_prefix + "link_prediction", "auc", auc(scores, eval.labels)});
  }
  if (wants("cls")) {
    if (bundle.labels.empty()) throw std::runtime_error("eval: classification needs labels");
    Matrix train_z(split.train_ids.size(), z_all.cols());
    std::vector<int> train_y;
    for (std::size_t i = 0; i < split.train_ids.size(); ++i) {
      for (std::size_t t = 0; t < z_all.cols(); ++t) train_z(i, t) = z_all(i, t);
      train_y.push_back(bundle.labels[split.train_ids[i]]);
    }
    Matrix test_z(edgeless.size(), z_all.cols());
    std::vector<int> test_y;
    for (std::size_t i = 0; i < edgeless.size(); ++i) {
      const NodeId r = row[edgeless[i]];
      for (std::size_t t = 0; t < z_all.cols(); ++t) test_z(i, t) = z_all(r, t);
      test_y.push_back(bundle.labels[edgeless[i]]);
    }
    auto [macro, micro] = logistic_classify(train_z, train_y, test_z, test_y, bundle.num_classes,
                                            cfg.logistic_reg);
    entries.push_back({task_prefix + "classification", "macro_f1", macro});
    entries.push_back({task_prefix + "classification", "micro_f1", micro});
  }
  if (wants("cluster")) {
    if (bundle.labels.empty()) throw std::runtime_error("eval: clustering needs labels");
    std::vector<NodeId> edgeless_rows;
    std::vector<int> truth;
    for (auto v : edgeless) {
      edgeless_rows.push_back(row[v]);
      truth.push_back(bundle.labels[v]);
    }
    entries.push_back({task_prefix + "community", "nmi",
                       kmeans_nmi(z_all, static_cast<std::size_t>(bundle.num_classes),
                                  edgeless_rows, truth, cfg.eval_seed, cfg.kmeans_restarts)});
  }
  return entries;
}

/// Att-Only baseline: the (possibly masked) attribute rows in Z_all order.
inline Matrix att_only_zall(const RunConfig& cfg, const DatasetBundle& bundle,
                            const SplitSpec& split) {
  AttributeMatrix attrs = cfg.mask_fraction > 0.0
                              ? mask_attributes(bundle.attributes, cfg.mask_fraction, cfg.seed)
                              : bundle.attributes;
  std::vector<NodeId> order = split.train_ids;
  for (auto v : edgeless_ids_of(split)) order.push_back(v);
  return att_only_embeddings(attrs.select_rows(order));
}

}  // namespace edgeless
