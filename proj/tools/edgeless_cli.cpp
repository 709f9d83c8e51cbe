// Command-line front end for the edgeless-node embedding pipeline:
// train / infer / eval / bench-scaling.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edgeless/bench.hpp"
#include "edgeless/edgeless.hpp"

namespace fs = std::filesystem;
using namespace edgeless;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  std::optional<std::string> variant;
  std::optional<std::size_t> dim;
  std::optional<double> alpha, beta, gamma, b, mask_fraction;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--seed", ov.seed, "Override config seed");
  cmd->add_option("--k", ov.k, "Override kNN graph k");
  cmd->add_option("--variant", ov.variant, "GNN variant: gcn, sage, gin")
      ->check(CLI::IsMember({"gcn", "sage", "gin"}));
  cmd->add_option("--dim", ov.dim, "Embedding dimension");
  cmd->add_option("--alpha", ov.alpha, "Second-order loss weight");
  cmd->add_option("--beta", ov.beta, "Negative-pair distance weight");
  cmd->add_option("--gamma", ov.gamma, "Energy sharpness");
  cmd->add_option("--b", ov.b, "Energy offset");
  cmd->add_option("--mask-fraction", ov.mask_fraction, "Fraction of attribute entries to mask");
}

void apply(RunConfig& cfg, const Overrides& ov) {
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.k) cfg.k = *ov.k;
  if (ov.variant) cfg.variant = *ov.variant;
  if (ov.dim) cfg.dim = *ov.dim;
  if (ov.alpha) cfg.train.loss_params.alpha = *ov.alpha;
  if (ov.beta) cfg.train.loss_params.beta = *ov.beta;
  if (ov.gamma) cfg.train.loss_params.gamma = *ov.gamma;
  if (ov.b) cfg.train.loss_params.b = *ov.b;
  if (ov.mask_fraction) cfg.mask_fraction = *ov.mask_fraction;
}

DatasetBundle load_bundle(const RunConfig& cfg) {
  std::optional<std::string> labels;
  if (!cfg.labels_path.empty()) labels = cfg.labels_path;
  return load_dataset(cfg.edges_path, cfg.attrs_path, labels);
}

int cmd_train(const std::string& config_path, const Overrides& ov, const std::string& out_dir) {
  RunConfig cfg = RunConfig::from_file(config_path);
  apply(cfg, ov);
  DatasetBundle bundle = load_bundle(cfg);
  fs::create_directories(out_dir);

  TrainedPipeline tp = run_training(cfg, bundle, &std::cerr);
  save_split(tp.split, out_dir + "/split.txt");
  save_checkpoint({tp.result.params, cfg.train, tp.result.history}, out_dir + "/checkpoint.bin");

  std::ofstream hist(out_dir + "/history.txt");
  hist.precision(17);
  for (std::size_t e = 0; e < tp.result.history.size(); ++e)
    hist << e << " " << tp.result.history[e].train_loss << " " << tp.result.history[e].val_ap
         << "\n";
  std::cout << "wrote " << out_dir << "/checkpoint.bin, split.txt, history.txt\n";
  return 0;
}

int cmd_infer(const std::string& config_path, const std::string& checkpoint_path,
              const std::string& split_path, const Overrides& ov, const std::string& out_dir) {
  RunConfig cfg = RunConfig::from_file(config_path);
  apply(cfg, ov);
  DatasetBundle bundle = load_bundle(cfg);
  Checkpoint ck = load_checkpoint(checkpoint_path);
  if (ck.params.input_dim != bundle.attributes.num_features())
    throw std::runtime_error("infer: checkpoint feature dimension does not match dataset");
  SplitSpec split = load_split(split_path);
  fs::create_directories(out_dir);

  InferenceOutput out = run_inference(cfg, ck.params, bundle, split);
  save_embeddings_text(out.z_all, out_dir + "/z_all.txt");
  save_embeddings_binary(out.z_all, out_dir + "/z_all.bin");
  save_embeddings_text(out.z_edgeless, out_dir + "/z_edgeless.txt");
  save_embeddings_binary(out.z_edgeless, out_dir + "/z_edgeless.bin");
  std::cout << "wrote " << out_dir << "/z_all.{txt,bin}, z_edgeless.{txt,bin}\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& embeddings_path,
             const std::string& split_path, std::vector<std::string> tasks, bool att_only,
             const Overrides& ov, const std::string& out_dir) {
  RunConfig cfg = RunConfig::from_file(config_path);
  apply(cfg, ov);
  DatasetBundle bundle = load_bundle(cfg);
  SplitSpec split = load_split(split_path);
  fs::create_directories(out_dir);
  if (tasks.empty()) tasks = {"lp", "cls", "cluster"};

  Matrix z_all = embeddings_path.ends_with(".bin") ? load_embeddings_binary(embeddings_path)
                                                   : load_embeddings_text(embeddings_path);
  auto entries = run_evaluation(cfg, z_all, bundle, split, tasks);
  if (att_only) {
    Matrix z_att = att_only_zall(cfg, bundle, split);
    auto base = run_evaluation(cfg, z_att, bundle, split, tasks, "att_only/");
    entries.insert(entries.end(), base.begin(), base.end());
  }
  save_metric_report(entries, cfg.eval_seed, cfg.hash(), out_dir + "/report.txt");
  print_metric_table(entries, std::cout);
  return 0;
}

int cmd_bench(const std::string& config_path, std::vector<std::size_t> sizes,
              std::size_t fixed_size, std::uint64_t seed) {
  if (sizes.empty()) sizes = {1000, 3000, 5000, 7000, 9000, 11000};
  std::optional<DatasetBundle> bundle;
  if (!config_path.empty()) {
    RunConfig cfg = RunConfig::from_file(config_path);
    bundle = load_bundle(cfg);
  }

  const std::size_t f = 500, nnz = 30, d = 64;
  auto graph_for = [&](std::size_t n, std::size_t k, std::uint64_t s) {
    if (bundle) {
      auto ids = forest_fire_sample(bundle->graph, n, 0.7, s);
      AttributeMatrix x = bundle->attributes.select_rows(ids);
      return std::make_pair(build_knng(x, k), std::move(x));
    }
    return std::make_pair(synthetic_knn_like_graph(n, k, s),
                          random_sparse_attributes(n, f, nnz, s + 1));
  };

  std::cout << "size k seconds\n";
  for (std::size_t n : sizes) {
    auto [g, x] = graph_for(n, 3, seed);
    ModelParams p = init_params(GnnVariant::SAGE_MEAN, x.num_features(), d, seed);
    std::cout << n << " 3 " << time_forward_best(p, g, x) << "\n";
  }
  for (std::size_t k = 2; k <= 8; ++k) {
    auto [g, x] = graph_for(fixed_size, k, seed + k);
    ModelParams p = init_params(GnnVariant::SAGE_MEAN, x.num_features(), d, seed);
    std::cout << fixed_size << " " << k << " " << time_forward_best(p, g, x) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inductive embedding of edgeless nodes over an attribute kNN computation graph"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::string checkpoint_path, split_path, embeddings_path;
  std::vector<std::string> tasks;
  bool att_only = false;
  Overrides ov;
  std::vector<std::size_t> bench_sizes;
  std::size_t bench_fixed = 2500;
  std::uint64_t bench_seed = 7;

  auto* train_cmd = app.add_subcommand("train", "Train a model on a dataset");
  train_cmd->add_option("--config", config_path, "Run configuration file")->required();
  train_cmd->add_option("--out-dir", out_dir, "Output directory");
  add_override_flags(train_cmd, ov);

  auto* infer_cmd = app.add_subcommand("infer", "Embed all nodes, including edgeless ones");
  infer_cmd->add_option("--config", config_path)->required();
  infer_cmd->add_option("--checkpoint", checkpoint_path)->required();
  infer_cmd->add_option("--split", split_path)->required();
  infer_cmd->add_option("--out-dir", out_dir);
  add_override_flags(infer_cmd, ov);

  auto* eval_cmd = app.add_subcommand("eval", "Run downstream tasks on saved embeddings");
  eval_cmd->add_option("--config", config_path)->required();
  eval_cmd->add_option("--embeddings", embeddings_path, "z_all file (.txt or .bin)")->required();
  eval_cmd->add_option("--split", split_path)->required();
  eval_cmd->add_option("--tasks", tasks, "Subset of: lp cls cluster (default all)");
  eval_cmd->add_flag("--baseline", att_only, "Also report the att-only baseline");
  eval_cmd->add_option("--out-dir", out_dir);
  add_override_flags(eval_cmd, ov);

  auto* bench_cmd = app.add_subcommand("bench-scaling", "Forward-pass runtime vs |V| and k");
  bench_cmd->add_option("--config", config_path, "Dataset config (synthetic graphs if omitted)");
  bench_cmd->add_option("--sizes", bench_sizes, "Node-count grid");
  bench_cmd->add_option("--fixed-size", bench_fixed, "Node count for the k sweep");
  bench_cmd->add_option("--seed", bench_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return cmd_train(config_path, ov, out_dir);
    if (infer_cmd->parsed()) return cmd_infer(config_path, checkpoint_path, split_path, ov, out_dir);
    if (eval_cmd->parsed())
      return cmd_eval(config_path, embeddings_path, split_path, tasks, att_only, ov, out_dir);
    if (bench_cmd->parsed()) return cmd_bench(config_path, bench_sizes, bench_fixed, bench_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
