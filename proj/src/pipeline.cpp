#include "tipo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "tipo/error.hpp"

namespace tipo {
namespace {

std::optional<double> mean_optional(const std::vector<std::optional<double>>& v) {
  double s = 0.0;
  int n = 0;
  for (const auto& x : v)
    if (x) {
      s += *x;
      ++n;
    }
  return n ? std::optional<double>(s / n) : std::nullopt;
}

Aggregate mean_aggregate(const std::vector<Aggregate>& as) {
  Aggregate m;
  const double n = static_cast<double>(as.size());
  for (const auto& a : as) {
    m.n_tasks += a.n_tasks;
    for (int p = 0; p < 2; ++p) m.sr[p] += a.sr[p] / n;
    m.sr_overall += a.sr_overall / n;
    m.compliance += a.compliance / n;
    m.non_compliance += a.non_compliance / n;
    m.pd += a.pd / n;
  }
  for (int p = 0; p < 2; ++p) {
    std::vector<std::optional<double>> s, u;
    for (const auto& a : as) {
      s.push_back(a.pas_s[p]);
      u.push_back(a.pas_u[p]);
    }
    m.pas_s[p] = mean_optional(s);
    m.pas_u[p] = mean_optional(u);
  }
  return m;
}

const EvalResult& find_method(const std::vector<EvalResult>& rs, Method m) {
  for (const auto& r : rs)
    if (r.method == method_name(m)) return r;
  throw PreconditionError("missing results for method " + std::string(method_name(m)));
}

std::string fmt(double v) { return format_number(v); }

}  // namespace

json splits_to_json(const Splits& s) {
  return json{{"train", s.train}, {"val", s.val}, {"test", s.test}};
}

Splits splits_from_json(const json& j) {
  Splits s;
  try {
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed splits.json: ") + e.what());
  }
  return s;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  std::vector<Trajectory> trajectories;
  for (const auto& p : ds.pairs) {
    trajectories.push_back(p.privacy_first);
    trajectories.push_back(p.utility_first);
  }
  write_jsonl(dir / "tasks.jsonl", ds.tasks);
  write_jsonl(dir / "trajectories.jsonl", trajectories);
  write_jsonl(dir / "pairs.jsonl", build_preference_pairs(ds.pairs));
  write_text_file(dir / "splits.json", splits_to_json(ds.splits).dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  ds.tasks = read_tasks(dir / "tasks.jsonl");
  auto paired = pair_trajectories(read_trajectories(dir / "trajectories.jsonl"));
  std::map<std::string, TrajectoryPair> by_id;
  for (auto& p : paired) by_id.emplace(p.privacy_first.task_id, std::move(p));
  for (const auto& t : ds.tasks) {
    auto it = by_id.find(t.task_id);
    if (it == by_id.end()) throw DataError("missing reference pair for task " + t.task_id);
    ds.pairs.push_back(it->second);
  }
  ds.splits = splits_from_json(read_json_file(dir / "splits.json"));
  if (auto leaks = split_leaks(ds.splits, ds.tasks); !leaks.empty())
    throw DataError("task " + leaks.front() + " is not in exactly one split");
  return ds;
}

TrainingData prepare_training(const Dataset& ds, const FeatureTemplate& tmpl) {
  TrainingData d;
  for (const auto& rec : select_tasks(ds, ds.splits.train)) {
    const auto info = task_info(rec.task, tmpl);
    for (auto p : kPersonas) d.sft.push_back(prepare_sft(rec.refs.of(p), info, tmpl));
    for (auto p : kPersonas) d.pairs.push_back(prepare_pair(make_preference_pair(rec.refs, p), info, tmpl));
  }
  d.val = select_tasks(ds, ds.splits.val);
  d.test = select_tasks(ds, ds.splits.test);
  return d;
}

TrainResult run_sft(const TrainingData& data, const RunConfig& cfg) {
  return train_sft(data.sft, cfg.train, cfg.features);
}

MethodRun run_method(const TrainingData& data, const RunConfig& cfg, Method method,
                     const TrainResult& sft) {
  MethodRun run{method, sft.params, sft.log, {}};
  if (method == Method::sft) return run;
  TrainConfig tc = cfg.train;
  tc.objective.method = method;
  auto pref = train_pref(sft.params, data.pairs, tc, data.val);
  run.params = std::move(pref.params);
  run.pref_log = std::move(pref.log);
  return run;
}

bool ReproduceResult::all_passed() const {
  auto ok = [](const std::vector<AcceptanceCheck>& cs) {
    return std::all_of(cs.begin(), cs.end(), [](const auto& c) { return c.passed; });
  };
  if (!ok(checks)) return false;
  return std::all_of(seeds.begin(), seeds.end(), [&](const SeedResult& s) { return ok(s.checks); });
}

std::vector<AcceptanceCheck> ReproduceResult::all_checks() const {
  std::vector<AcceptanceCheck> all;
  for (const auto& s : seeds)
    for (const auto& c : s.checks)
      all.push_back({"seed " + std::to_string(s.seed) + ": " + c.name, c.passed, c.detail, c.criterion});
  all.insert(all.end(), checks.begin(), checks.end());
  return all;
}

std::vector<AcceptanceCheck> trend_checks(const std::vector<EvalResult>& mean) {
  const auto& tipo = find_method(mean, Method::tipo).overall;
  const auto& dpo = find_method(mean, Method::dpo).overall;
  const auto& wo_pw = find_method(mean, Method::tipo_wo_pw).overall;
  const auto& wo_pg = find_method(mean, Method::tipo_wo_pg).overall;
  std::vector<AcceptanceCheck> out;
  out.push_back({"trend(a) tipo compliance >= dpo compliance + 5",
                 tipo.compliance >= dpo.compliance + 5.0,
                 fmt(tipo.compliance) + " vs " + fmt(dpo.compliance), 8});
  out.push_back({"trend(b) tipo pd >= dpo pd", tipo.pd >= dpo.pd, fmt(tipo.pd) + " vs " + fmt(dpo.pd), 8});
  out.push_back({"trend(c) tipo compliance >= ablations",
                 tipo.compliance >= wo_pw.compliance && tipo.compliance >= wo_pg.compliance,
                 fmt(tipo.compliance) + " vs w/o pw " + fmt(wo_pw.compliance) + ", w/o pg " +
                     fmt(wo_pg.compliance), 8});
  out.push_back({"trend(d) tipo sr >= dpo sr - 0.03", tipo.sr_overall >= dpo.sr_overall - 0.03,
                 fmt(tipo.sr_overall) + " vs " + fmt(dpo.sr_overall), 8});
  return out;
}

ReproduceResult reproduce(const RunConfig& base, const std::vector<std::uint64_t>& seeds,
                          const std::filesystem::path& out_dir, bool with_properties) {
  if (seeds.empty()) throw ConfigError("reproduce needs at least one seed");
  ReproduceResult out;
  for (auto seed : seeds) {
    RunConfig cfg = base;
    cfg.set_seed(seed);
    const Dataset ds = generate(cfg.gen);
    const TrainingData data = prepare_training(ds, cfg.features);
    SeedResult sr;
    sr.seed = seed;

    const auto leaks = split_leaks(ds.splits, ds.tasks);
    sr.checks.push_back({"split hygiene", leaks.empty(),
                         leaks.empty() ? "no task spans splits" : "leaked " + leaks.front(), 10});

    const auto self = evaluate_with(data.test, [](const TaskRecord& r, Persona p) { return r.refs.of(p); },
                                    cfg.max_len, "reference");
    const auto& so = self.overall;
    sr.checks.push_back({"reference maxima",
                         so.sr_overall == 1.0 && so.compliance == 100.0 && so.non_compliance == 0.0 &&
                             so.pd == 1.0,
                         "sr " + fmt(so.sr_overall) + " compliance " + fmt(so.compliance) +
                             " non_compliance " + fmt(so.non_compliance) + " pd " + fmt(so.pd),
                         7});

    const auto sft = run_sft(data, cfg);
    const ReferencePolicy ref = clone_frozen(sft.params);
    double worst = 0.0;
    for (auto m : kAllMethods) {
      if (m == Method::sft) continue;
      ObjectiveConfig oc = cfg.train.objective;
      oc.method = m;
      worst = std::max(worst, std::abs(preference_loss(sft.params, ref, data.pairs, oc).loss -
                                       std::numbers::ln2));
    }
    sr.checks.push_back({"initialization identity", worst <= 1e-9, "max |loss - log 2| = " + json(worst).dump(), 2});

    for (auto m : kAllMethods) {
      const auto run = run_method(data, cfg, m, sft);
      sr.results.push_back(evaluate(run.params, data.test, cfg.max_len, std::string(method_name(m))));
    }
    const auto dir = out_dir / ("seed_" + std::to_string(seed));
    emit_report(sr.results, dir);
    write_text_file(dir / "tables.txt", format_tables(sr.results));
    out.seeds.push_back(std::move(sr));
  }

  for (std::size_t i = 0; i < kAllMethods.size(); ++i) {
    EvalResult m;
    m.method = out.seeds.front().results[i].method;
    std::vector<Aggregate> overall;
    std::map<TaskCategory, std::vector<Aggregate>> cats;
    for (const auto& s : out.seeds) {
      overall.push_back(s.results[i].overall);
      for (const auto& [c, a] : s.results[i].by_category) cats[c].push_back(a);
    }
    m.overall = mean_aggregate(overall);
    for (const auto& [c, v] : cats) m.by_category[c] = mean_aggregate(v);
    out.mean.push_back(std::move(m));
  }
  if (with_properties) out.checks = acceptance::property_checks();
  const auto trends = trend_checks(out.mean);
  out.checks.insert(out.checks.end(), trends.begin(), trends.end());

  emit_report(out.mean, out_dir);
  write_text_file(out_dir / "summary_range.csv", summary_range_csv(out));

  std::vector<EvalResult> comparison, ablation;
  for (const auto& r : out.mean) {
    if (r.method == "sft" || r.method == "dpo" || r.method == "step_dpo" || r.method == "tipo")
      comparison.push_back(r);
    if (r.method == "dpo" || r.method == "tipo_wo_pw" || r.method == "tipo_wo_pg" || r.method == "tipo")
      ablation.push_back(r);
  }
  write_text_file(out_dir / "comparison.txt", format_tables(comparison));
  write_text_file(out_dir / "ablation.txt", format_tables(ablation));

  write_text_file(out_dir / "acceptance.txt", format_checks(out.all_checks()));
  return out;
}

std::string summary_range_csv(const ReproduceResult& r) {
  std::ostringstream os;
  os << "method,metric,mean,min,max\n";
  for (std::size_t i = 0; i < r.mean.size(); ++i) {
    auto row = [&](const char* metric, auto get) {
      double lo = INFINITY, hi = -INFINITY;
      for (const auto& s : r.seeds) {
        const double v = get(s.results[i].overall);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      os << r.mean[i].method << ',' << metric << ',' << fmt(get(r.mean[i].overall)) << ',' << fmt(lo)
         << ',' << fmt(hi) << '\n';
    };
    row("sr_overall", [](const Aggregate& a) { return a.sr_overall; });
    row("compliance", [](const Aggregate& a) { return a.compliance; });
    row("non_compliance", [](const Aggregate& a) { return a.non_compliance; });
    row("pd", [](const Aggregate& a) { return a.pd; });
  }
  return os.str();
}

std::string format_checks(const std::vector<AcceptanceCheck>& checks) {
  std::ostringstream os;
  for (const auto& c : checks)
    os << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
  return os.str();
}

}  // namespace tipo
