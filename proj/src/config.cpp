#include "tipo/config.hpp"

#include <set>

#include "tipo/error.hpp"

namespace tipo {
namespace {

void reject_unknown(const json& obj, const std::string& section, std::set<std::string> known) {
  if (!obj.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("unknown config key '" + (section.empty() ? "" : section + ".") + it.key() + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& section) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + section + "." + key + "' has the wrong type");
  }
}

}  // namespace

void RunConfig::validate() const {
  gen.validate();
  train.validate();
  if (features.goal_buckets < 1 || features.step_buckets < 1)
    throw ConfigError("policy.goal_buckets and policy.step_buckets must be positive");
  if (max_len < 1) throw ConfigError("eval.max_len must be positive");
  if (train.max_len != max_len) throw ConfigError("train.max_len must equal eval.max_len");
}

json to_json(const RunConfig& c) {
  const auto& s = c.train.objective.score;
  return json{
      {"gen",
       {{"n_tasks", c.gen.n_tasks},
        {"category_mix", c.gen.category_mix},
        {"backbone_len_range", c.gen.backbone_len_range},
        {"decision_points_range", c.gen.decision_points_range},
        {"epilogue_prob", c.gen.epilogue_prob},
        {"seed", c.gen.seed},
        {"split", c.gen.split}}},
      {"train",
       {{"lr_sft", c.train.lr_sft},
        {"lr_pref", c.train.lr_pref},
        {"epochs_sft", c.train.epochs_sft},
        {"epochs_pref", c.train.epochs_pref},
        {"batch_size", c.train.batch_size},
        {"seed", c.train.seed},
        {"shuffle", c.train.shuffle},
        {"momentum", c.train.momentum},
        {"eval_every", c.train.eval_every},
        {"patience", c.train.patience}}},
      {"objective",
       {{"method", method_name(c.train.objective.method)},
        {"beta", c.train.objective.beta},
        {"gate_rejected", c.train.objective.gate_rejected}}},
      {"score",
       {{"aligned_score", s.aligned_score},
        {"conflict_score", s.conflict_score},
        {"neutral_score", s.neutral_score},
        {"delta_max", s.delta_max},
        {"gamma", s.gamma}}},
      {"policy", {{"goal_buckets", c.features.goal_buckets}, {"step_buckets", c.features.step_buckets}}},
      {"eval", {{"max_len", c.max_len}}},
      {"out_dir", c.out_dir},
  };
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  reject_unknown(j, "", {"gen", "train", "objective", "score", "policy", "eval", "out_dir"});
  if (auto it = j.find("gen"); it != j.end()) {
    reject_unknown(*it, "gen", {"n_tasks", "category_mix", "backbone_len_range",
                                "decision_points_range", "epilogue_prob", "seed", "split"});
    read(*it, "n_tasks", c.gen.n_tasks, "gen");
    read(*it, "category_mix", c.gen.category_mix, "gen");
    read(*it, "backbone_len_range", c.gen.backbone_len_range, "gen");
    read(*it, "decision_points_range", c.gen.decision_points_range, "gen");
    read(*it, "epilogue_prob", c.gen.epilogue_prob, "gen");
    read(*it, "seed", c.gen.seed, "gen");
    read(*it, "split", c.gen.split, "gen");
  }
  if (auto it = j.find("train"); it != j.end()) {
    reject_unknown(*it, "train", {"lr_sft", "lr_pref", "epochs_sft", "epochs_pref", "batch_size",
                                  "seed", "shuffle", "momentum", "eval_every", "patience"});
    read(*it, "lr_sft", c.train.lr_sft, "train");
    read(*it, "lr_pref", c.train.lr_pref, "train");
    read(*it, "epochs_sft", c.train.epochs_sft, "train");
    read(*it, "epochs_pref", c.train.epochs_pref, "train");
    read(*it, "batch_size", c.train.batch_size, "train");
    read(*it, "seed", c.train.seed, "train");
    read(*it, "shuffle", c.train.shuffle, "train");
    read(*it, "momentum", c.train.momentum, "train");
    read(*it, "eval_every", c.train.eval_every, "train");
    read(*it, "patience", c.train.patience, "train");
  }
  auto& obj = c.train.objective;
  if (auto it = j.find("objective"); it != j.end()) {
    reject_unknown(*it, "objective", {"method", "beta", "gate_rejected"});
    std::string method{method_name(obj.method)};
    read(*it, "method", method, "objective");
    auto m = parse_method(method);
    if (!m) throw ConfigError("unknown objective.method '" + method + "'");
    obj.method = *m;
    read(*it, "beta", obj.beta, "objective");
    read(*it, "gate_rejected", obj.gate_rejected, "objective");
  }
  if (auto it = j.find("score"); it != j.end()) {
    reject_unknown(*it, "score", {"aligned_score", "conflict_score", "neutral_score", "delta_max", "gamma"});
    read(*it, "aligned_score", obj.score.aligned_score, "score");
    read(*it, "conflict_score", obj.score.conflict_score, "score");
    read(*it, "neutral_score", obj.score.neutral_score, "score");
    read(*it, "delta_max", obj.score.delta_max, "score");
    read(*it, "gamma", obj.score.gamma, "score");
  }
  if (auto it = j.find("policy"); it != j.end()) {
    reject_unknown(*it, "policy", {"goal_buckets", "step_buckets"});
    read(*it, "goal_buckets", c.features.goal_buckets, "policy");
    read(*it, "step_buckets", c.features.step_buckets, "policy");
  }
  if (auto it = j.find("eval"); it != j.end()) {
    reject_unknown(*it, "eval", {"max_len"});
    read(*it, "max_len", c.max_len, "eval");
  }
  if (auto it = j.find("out_dir"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("out_dir must be a string");
    c.out_dir = it->get<std::string>();
  }
  c.train.max_len = c.max_len;
  c.validate();
  return c;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key=value: '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &j;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) throw ConfigError("empty path segment in override '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    if (!node->is_object() && !node->is_null())
      throw ConfigError("override path '" + key + "' crosses a non-object");
    pos = dot + 1;
  }
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json j = read_json_file(path);
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

RunConfig default_config_with(const std::vector<std::string>& overrides) {
  json j = to_json(RunConfig{});
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

}  // namespace tipo
