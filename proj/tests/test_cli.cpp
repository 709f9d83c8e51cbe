// Drives the built command-line binary end to end on a small synthetic
// dataset written to a temp directory. The binary path comes in through the
// EDGELESS_CLI_PATH compile definition.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "edgeless/synthetic.hpp"

using namespace edgeless;
namespace fs = std::filesystem;

namespace {

struct CliFixture {
  fs::path dir;
  std::string cli = EDGELESS_CLI_PATH;

  CliFixture() {
    dir = fs::temp_directory_path() / "egnn_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_dataset();
    write_config();
  }
  ~CliFixture() { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  void write_dataset() const {
    SyntheticDataset ds = planted_partition(120, 3, 0.12, 0.015, 5, 21);
    std::ofstream ef(path("edges.txt"));
    for (auto [u, v] : ds.graph.edges()) ef << u << " " << v << "\n";
    std::ofstream af(path("attrs.txt"));
    for (std::size_t i = 0; i < ds.attributes.num_nodes(); ++i)
      for (auto [f, val] : ds.attributes.row(i)) af << i << " " << f << " " << val << "\n";
    std::ofstream lf(path("labels.txt"));
    for (std::size_t i = 0; i < ds.labels.size(); ++i) lf << i << " c" << ds.labels[i] << "\n";
  }

  void write_config() const {
    std::ofstream f(path("run.cfg"));
    f << "edges=" << path("edges.txt") << "\n"
      << "attrs=" << path("attrs.txt") << "\n"
      << "labels=" << path("labels.txt") << "\n"
      << "k=3\nvariant=sage\ndim=16\nseed=5\neval_seed=5\n"
      << "learning_rate=0.01\nmax_epochs=15\npatience=10\n";
  }

  // returns exit status; stdout+stderr captured to log
  int run(const std::string& args, std::string* log = nullptr) const {
    const std::string log_path = path("cmd.log");
    const std::string cmd = cli + " " + args + " > " + log_path + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (log) {
      std::ifstream lf(log_path);
      std::stringstream ss;
      ss << lf.rdbuf();
      *log = ss.str();
    }
    return rc == -1 ? -1 : WEXITSTATUS(rc);
  }

  std::string bytes(const std::string& name) const {
    std::ifstream f(dir / name, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  }
};

}  // namespace

TEST_CASE_METHOD(CliFixture, "train then infer then eval") {
  std::string log;
  REQUIRE(run("train --config " + path("run.cfg") + " --out-dir " + path("out"), &log) == 0);
  CHECK(fs::exists(dir / "out/checkpoint.bin"));
  CHECK(fs::exists(dir / "out/split.txt"));
  CHECK(fs::exists(dir / "out/history.txt"));

  REQUIRE(run("infer --config " + path("run.cfg") + " --checkpoint " + path("out/checkpoint.bin") +
                  " --split " + path("out/split.txt") + " --out-dir " + path("out"),
              &log) == 0);
  CHECK(fs::exists(dir / "out/z_all.bin"));
  CHECK(fs::exists(dir / "out/z_edgeless.txt"));

  REQUIRE(run("eval --config " + path("run.cfg") + " --embeddings " + path("out/z_all.bin") +
                  " --split " + path("out/split.txt") + " --baseline --out-dir " + path("out"),
              &log) == 0);
  CHECK(fs::exists(dir / "out/report.txt"));
  // table printed with both the model rows and the baseline rows
  CHECK(log.find("link_prediction") != std::string::npos);
  CHECK(log.find("att_only/link_prediction") != std::string::npos);
  CHECK(log.find("community") != std::string::npos);

  SECTION("rerun with identical seeds is byte-identical") {
    REQUIRE(run("train --config " + path("run.cfg") + " --out-dir " + path("out2")) == 0);
    REQUIRE(run("infer --config " + path("run.cfg") + " --checkpoint " +
                path("out2/checkpoint.bin") + " --split " + path("out2/split.txt") +
                " --out-dir " + path("out2")) == 0);
    REQUIRE(run("eval --config " + path("run.cfg") + " --embeddings " + path("out2/z_all.bin") +
                " --split " + path("out2/split.txt") + " --baseline --out-dir " + path("out2")) == 0);
    CHECK(bytes("out/checkpoint.bin") == bytes("out2/checkpoint.bin"));
    CHECK(bytes("out/z_all.bin") == bytes("out2/z_all.bin"));
    CHECK(bytes("out/report.txt") == bytes("out2/report.txt"));
  }
  SECTION("--seed override changes the checkpoint") {
    REQUIRE(run("train --config " + path("run.cfg") + " --seed 6 --out-dir " + path("out3")) == 0);
    CHECK(bytes("out/checkpoint.bin") != bytes("out3/checkpoint.bin"));
  }
}

TEST_CASE_METHOD(CliFixture, "eval restricted to one task") {
  std::string log;
  REQUIRE(run("train --config " + path("run.cfg") + " --out-dir " + path("out")) == 0);
  REQUIRE(run("infer --config " + path("run.cfg") + " --checkpoint " + path("out/checkpoint.bin") +
              " --split " + path("out/split.txt") + " --out-dir " + path("out")) == 0);
  REQUIRE(run("eval --config " + path("run.cfg") + " --embeddings " + path("out/z_all.txt") +
                  " --split " + path("out/split.txt") + " --tasks lp --out-dir " + path("out"),
              &log) == 0);
  CHECK(log.find("link_prediction") != std::string::npos);
  CHECK(log.find("classification") == std::string::npos);
}

TEST_CASE_METHOD(CliFixture, "bench-scaling emits one row per grid point") {
  std::string log;
  REQUIRE(run("bench-scaling --sizes 200 400 --fixed-size 200 --seed 3", &log) == 0);
  std::istringstream ss(log);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "size k seconds");
  std::size_t rows = 0;
  while (std::getline(ss, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2 + 7);  // two sizes at k=3, then k in 2..8
}

TEST_CASE_METHOD(CliFixture, "errors exit nonzero with a message") {
  std::string log;

  SECTION("missing config file") {
    CHECK(run("train --config " + path("nope.cfg"), &log) == 1);
    CHECK(log.find("error:") != std::string::npos);
  }
  SECTION("unknown config key") {
    std::ofstream f(path("bad.cfg"));
    f << "edges=" << path("edges.txt") << "\nbogus=1\n";
    f.close();
    CHECK(run("train --config " + path("bad.cfg"), &log) == 1);
    CHECK(log.find("unknown config key") != std::string::npos);
  }
  SECTION("checkpoint/dataset dimension mismatch") {
    REQUIRE(run("train --config " + path("run.cfg") + " --out-dir " + path("out")) == 0);
    // rewrite the attribute file with an extra feature column id
    std::ofstream af(path("attrs.txt"), std::ios::app);
    af << 0 << " " << 99 << " 1.0\n";
    af.close();
    CHECK(run("infer --config " + path("run.cfg") + " --checkpoint " + path("out/checkpoint.bin") +
                  " --split " + path("out/split.txt") + " --out-dir " + path("out"),
              &log) == 1);
    CHECK(log.find("error:") != std::string::npos);
  }
  SECTION("unknown subcommand rejected by the parser") {
    CHECK(run("frobnicate", &log) != 0);
  }
}
