#include "tipo/cli.hpp"

#include <algorithm>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tipo/aligner.hpp"
#include "tipo/config.hpp"
#include "tipo/error.hpp"
#include "tipo/pipeline.hpp"

namespace tipo {
namespace {

struct ConfigArgs {
  std::string config;
  std::vector<std::string> sets;
};

void add_config_flags(CLI::App* cmd, ConfigArgs& a) {
  cmd->add_option("--config", a.config, "JSON run config");
  cmd->add_option("--set", a.sets, "override, key=value (dotted keys)")->take_all();
}

RunConfig resolve_config(const ConfigArgs& a, std::vector<std::string> extra) {
  std::vector<std::string> sets = a.sets;
  sets.insert(sets.end(), extra.begin(), extra.end());
  return a.config.empty() ? default_config_with(sets) : load_config(a.config, sets);
}

std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& raw) {
  std::vector<std::uint64_t> out;
  for (const auto& r : raw) {
    std::stringstream ss(r);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      try {
        std::size_t used = 0;
        out.push_back(std::stoull(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ConfigError("invalid seed '" + tok + "'");
      }
    }
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trajectory preference optimization lab"};
  app.require_subcommand(1);

  ConfigArgs gen_cfg, train_cfg, repro_cfg;
  std::string gen_out = "data", gen_seed;
  int gen_n_tasks = 0;
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  add_config_flags(gen, gen_cfg);
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--n-tasks", gen_n_tasks, "number of tasks");

  std::string align_in, align_out;
  auto* align = app.add_subcommand("align", "align preference pairs");
  align->add_option("--pairs", align_in, "pairs JSONL")->required();
  align->add_option("--out", align_out, "aligned pairs JSONL")->required();

  std::string train_data, train_out = "run", train_method, train_seed;
  auto* train = app.add_subcommand("train", "SFT then preference training");
  add_config_flags(train, train_cfg);
  train->add_option("--data", train_data, "dataset directory")->required();
  train->add_option("--out", train_out, "output directory");
  train->add_option("--method", train_method, "sft|dpo|step_dpo|tipo|tipo_wo_pw|tipo_wo_pg");
  train->add_option("--seed", train_seed, "training seed");

  std::string eval_ckpt, eval_data, eval_out = "eval", eval_split = "test", eval_name = "model";
  int eval_max_len = kDefaultMaxLen;
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  ev->add_option("--checkpoint", eval_ckpt, "checkpoint JSON")->required();
  ev->add_option("--data", eval_data, "dataset directory")->required();
  ev->add_option("--out", eval_out, "report directory");
  ev->add_option("--split", eval_split, "train|val|test")->check(CLI::IsMember({"train", "val", "test"}));
  ev->add_option("--name", eval_name, "method label in reports");
  ev->add_option("--max-len", eval_max_len, "generation length cap");

  std::vector<std::string> repro_seeds;
  std::string repro_out;
  auto* repro = app.add_subcommand("reproduce", "run every method and the trend checks");
  add_config_flags(repro, repro_cfg);
  repro->add_option("--seed", repro_seeds, "seed or comma-separated seeds")->required()->take_all();
  repro->add_option("--out", repro_out, "output directory (default: config out_dir)");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*gen) {
      std::vector<std::string> extra;
      if (!gen_seed.empty()) extra.push_back("gen.seed=" + gen_seed);
      if (gen_n_tasks > 0) extra.push_back("gen.n_tasks=" + std::to_string(gen_n_tasks));
      const auto cfg = resolve_config(gen_cfg, extra);
      const auto ds = generate(cfg.gen);
      save_dataset(gen_out, ds);
      write_text_file(std::filesystem::path(gen_out) / "config.json", to_json(cfg).dump(2) + "\n");
      out << "wrote " << ds.tasks.size() << " tasks, " << 2 * ds.pairs.size() << " trajectories, "
          << 2 * ds.pairs.size() << " preference pairs to " << gen_out << " (split "
          << ds.splits.train.size() << "/" << ds.splits.val.size() << "/" << ds.splits.test.size() << ")\n";
    } else if (*align) {
      std::vector<AlignedPair> aligned;
      for (const auto& p : read_pairs(align_in)) aligned.push_back(align_pair(p));
      write_jsonl(align_out, aligned);
      out << "aligned " << aligned.size() << " pairs -> " << align_out << "\n";
    } else if (*train) {
      std::vector<std::string> extra;
      if (!train_seed.empty()) extra.push_back("train.seed=" + train_seed);
      if (!train_method.empty()) extra.push_back("objective.method=\"" + train_method + "\"");
      const auto cfg = resolve_config(train_cfg, extra);
      const auto ds = load_dataset(train_data);
      const auto data = prepare_training(ds, cfg.features);
      const auto method = cfg.train.objective.method;
      const auto sft = run_sft(data, cfg);
      const auto run = run_method(data, cfg, method, sft);
      const std::filesystem::path dir = train_out;
      const std::string name{method_name(method)};
      save_checkpoint(dir / (name + ".ckpt.json"), run.params);
      std::vector<EpochLog> log = run.sft_log;
      for (auto& e : log) e.split = "sft_" + e.split;
      log.insert(log.end(), run.pref_log.begin(), run.pref_log.end());
      write_text_file(dir / (name + ".train_log.csv"), training_log_csv(log));
      out << "trained " << name << " -> " << (dir / (name + ".ckpt.json")).string() << "\n";
    } else if (*ev) {
      const auto params = load_checkpoint(eval_ckpt);
      const auto ds = load_dataset(eval_data);
      const auto& ids = eval_split == "train" ? ds.splits.train
                        : eval_split == "val" ? ds.splits.val
                                              : ds.splits.test;
      const auto records = select_tasks(ds, ids);
      if (records.empty()) throw DataError("split '" + eval_split + "' is empty");
      const auto result = evaluate(params, records, eval_max_len, eval_name);
      emit_report({result}, eval_out);
      std::vector<Trajectory> generated;
      for (const auto& t : result.tasks)
        for (const auto& g : t.generated)
          if (!g.steps.empty()) generated.push_back(g);
      write_jsonl(std::filesystem::path(eval_out) / "generations.jsonl", generated);
      out << format_tables({result});
    } else if (*repro) {
      const auto seeds = parse_seeds(repro_seeds);
      if (seeds.empty()) throw ConfigError("reproduce requires --seed");
      const auto cfg = resolve_config(repro_cfg, {});
      const std::filesystem::path dir = repro_out.empty() ? cfg.out_dir : repro_out;
      const auto r = reproduce(cfg, seeds, dir);
      out << "mean over " << seeds.size() << " seed(s)\n" << format_tables(r.mean) << "\n";
      out << format_checks(r.all_checks());
      return r.all_passed() ? kExitOk : kExitAcceptance;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace tipo
