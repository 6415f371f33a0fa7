#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "tipo/cli.hpp"
#include "tipo/config.hpp"
#include "tipo/error.hpp"

using namespace tipo;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

// Value of `column` in the row of summary.csv whose first cell is `method`.
double summary_value(const fs::path& csv, const std::string& method, const std::string& column) {
  std::ifstream in(csv);
  std::string header, line;
  std::getline(in, header);
  std::vector<std::string> cols;
  std::stringstream hs(header);
  for (std::string c; std::getline(hs, c, ',');) cols.push_back(c);
  const auto idx = std::find(cols.begin(), cols.end(), column) - cols.begin();
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!cells.empty() && cells[0] == method) return std::stod(cells.at(idx));
  }
  throw std::runtime_error("no row for " + method);
}

}  // namespace

TEST_CASE("gen writes the dataset files") {
  const auto dir = testing::scratch("cli_gen");
  const auto r = cli({"gen", "--n-tasks", "150", "--out", (dir / "d").string()});
  REQUIRE(r.code == kExitOk);
  CHECK(count_lines(dir / "d" / "trajectories.jsonl") == 300);
  CHECK(count_lines(dir / "d" / "pairs.jsonl") == 300);
  CHECK(count_lines(dir / "d" / "tasks.jsonl") == 150);
  CHECK(fs::exists(dir / "d" / "splits.json"));
  CHECK(fs::exists(dir / "d" / "config.json"));

  REQUIRE(cli({"gen", "--n-tasks", "150", "--out", (dir / "e").string()}).code == kExitOk);
  CHECK(slurp(dir / "d" / "pairs.jsonl") == slurp(dir / "e" / "pairs.jsonl"));

  REQUIRE(cli({"align", "--pairs", (dir / "d" / "pairs.jsonl").string(), "--out", (dir / "a.jsonl").string()})
              .code == kExitOk);
  CHECK(count_lines(dir / "a.jsonl") == 300);
}

TEST_CASE("train then eval memorizes a one-task dataset") {
  const auto dir = testing::scratch("cli_one");
  const auto data = (dir / "d").string();
  REQUIRE(cli({"gen", "--n-tasks", "1", "--out", data, "--set", "gen.split=[1,0,0]"}).code == kExitOk);
  const auto t = cli({"train", "--data", data, "--out", (dir / "r").string(), "--method", "sft", "--set",
                      "train.epochs_sft=200"});
  REQUIRE(t.code == kExitOk);
  CHECK(fs::exists(dir / "r" / "sft.train_log.csv"));
  const auto e = cli({"eval", "--checkpoint", (dir / "r" / "sft.ckpt.json").string(), "--data", data, "--split",
                      "train", "--out", (dir / "ev").string(), "--name", "sft"});
  REQUIRE(e.code == kExitOk);
  CHECK(summary_value(dir / "ev" / "summary.csv", "sft", "sr_overall") == 1.0);
  CHECK(fs::exists(dir / "ev" / "generations.jsonl"));
}

TEST_CASE("preference methods train from the command line") {
  const auto dir = testing::scratch("cli_pref");
  const auto data = (dir / "d").string();
  REQUIRE(cli({"gen", "--n-tasks", "20", "--out", data}).code == kExitOk);
  const auto t = cli({"train", "--data", data, "--out", (dir / "r").string(), "--method", "tipo", "--set",
                      "train.epochs_sft=5", "train.epochs_pref=5"});
  REQUIRE(t.code == kExitOk);
  const auto log = slurp(dir / "r" / "tipo.train_log.csv");
  CHECK(log.rfind("epoch,split,loss,mean_z,compliance\n", 0) == 0);
  CHECK(log.find("sft_train") != std::string::npos);
  CHECK(log.find("\n0,train,0.693147181,") != std::string::npos);
}

TEST_CASE("reproduce is deterministic and needs a seed") {
  const auto dir = testing::scratch("cli_repro");
  CHECK(cli({"reproduce"}).code == kExitUsage);
  const auto a = cli({"reproduce", "--seed", "7", "--out", (dir / "a").string()});
  const auto b = cli({"reproduce", "--seed", "7", "--out", (dir / "b").string()});
  CHECK(a.code == b.code);
  CHECK(a.code != kExitUsage);
  CHECK(slurp(dir / "a" / "summary.csv") == slurp(dir / "b" / "summary.csv"));
  CHECK(slurp(dir / "a" / "report.csv") == slurp(dir / "b" / "report.csv"));
  for (const char* f : {"comparison.txt", "ablation.txt", "acceptance.txt", "categories.csv", "summary_range.csv",
                        "seed_7/summary.csv"})
    CHECK(fs::exists(dir / "a" / f));
  CHECK(a.out.find("PASS") != std::string::npos);
}

TEST_CASE("error exit codes") {
  const auto dir = testing::scratch("cli_err");
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"gen", "--out", (dir / "d").string(), "--set", "gen.bogus=1"}).code == kExitUsage);
  CHECK(cli({"gen", "--out", (dir / "d").string(), "--set", "gen.n_tasks=0"}).code == kExitUsage);
  CHECK(cli({"train", "--data", (dir / "missing").string()}).code == kExitData);
  CHECK(cli({"train", "--data", (dir / "missing").string(), "--method", "ppo"}).code == kExitUsage);

  REQUIRE(cli({"gen", "--n-tasks", "5", "--out", (dir / "d").string()}).code == kExitOk);
  std::ofstream(dir / "bad.ckpt.json") << R"({"header":{"F":3,"n_actions":20,"feature_template_version":1},"weights":[]})";
  const auto r = cli({"eval", "--checkpoint", (dir / "bad.ckpt.json").string(), "--data", (dir / "d").string()});
  CHECK(r.code == kExitData);
  CHECK(!r.err.empty());
}

TEST_CASE("config overrides") {
  auto cfg = default_config_with({"train.lr_pref=0.25", "objective.method=\"dpo\"", "gen.split=[0.5,0.25,0.25]",
                                  "out_dir=runs"});
  CHECK(cfg.train.lr_pref == 0.25);
  CHECK(cfg.train.objective.method == Method::dpo);
  CHECK(cfg.gen.split[1] == 0.25);
  CHECK(cfg.out_dir == "runs");
  CHECK(default_config_with({"objective.method=tipo_wo_pg"}).train.objective.method == Method::tipo_wo_pg);
  CHECK_THROWS_AS(default_config_with({"train.nope=1"}), ConfigError);
  CHECK_THROWS_AS(default_config_with({"nokey"}), ConfigError);
  CHECK_THROWS_AS(default_config_with({"objective.beta=-1"}), ConfigError);

  const auto dir = testing::scratch("cli_cfg");
  std::ofstream(dir / "c.json") << to_json(cfg).dump(2);
  const auto back = load_config(dir / "c.json", {});
  CHECK(to_json(back) == to_json(cfg));
}
