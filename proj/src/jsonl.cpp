#include "tipo/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "tipo/error.hpp"

namespace tipo {
namespace {

const json& field(const json& j, const char* key, std::size_t line) {
  if (!j.is_object()) throw SchemaError("expected a JSON object", line);
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'", line);
  return *it;
}

std::string string_field(const json& j, const char* key, std::size_t line) {
  const auto& v = field(j, key, line);
  if (!v.is_string()) throw SchemaError(std::string("field '") + key + "' must be a string", line);
  return v.get<std::string>();
}

int int_field(const json& j, const char* key, std::size_t line) {
  const auto& v = field(j, key, line);
  if (!v.is_number_integer())
    throw SchemaError(std::string("field '") + key + "' must be an integer", line);
  return v.get<int>();
}

ActionType action_field(const json& j, const char* key, std::size_t line) {
  auto name = string_field(j, key, line);
  auto a = parse_action(name);
  if (!a) throw SchemaError("unknown action '" + name + "'", line);
  return *a;
}

Persona persona_field(const json& j, std::size_t line) {
  auto name = string_field(j, "persona", line);
  auto p = parse_persona(name);
  if (!p) throw SchemaError("unknown persona '" + name + "'", line);
  return *p;
}

Args args_from_json(const json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError("'args' must be an object", line);
  Args args;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string())
      throw SchemaError("argument '" + it.key() + "' must be a string", line);
    args[it.key()] = it.value().get<std::string>();
  }
  return args;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  return out;
}

// Calls fn(json, line) for each non-blank line.
template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line);
    }
    fn(j, line);
  }
}

template <typename T>
void write_lines(const std::filesystem::path& path, const std::vector<T>& items) {
  auto out = open_out(path);
  for (const auto& item : items) out << to_json(item).dump() << '\n';
}

json step_or_placeholder(const Step& s) {
  return s.is_placeholder() ? json("no_action") : to_json(s);
}

Step column_side(const json& j, int t, std::size_t line) {
  if (j.is_string()) {
    if (j.get<std::string>() != "no_action")
      throw SchemaError("column side must be a step or \"no_action\"", line);
    return placeholder_step(t);
  }
  return step_from_json(j, line);
}

}  // namespace

json to_json(const Step& s) {
  return json{{"index", s.index},
              {"action", action_name(s.action)},
              {"args", s.args},
              {"desc", s.desc}};
}

json to_json(const Trajectory& t) {
  json steps = json::array();
  for (const auto& s : t.steps) steps.push_back(to_json(s));
  return json{{"task_id", t.task_id}, {"persona", persona_name(t.persona)}, {"steps", steps}};
}

json to_json(const PreferencePair& p) {
  return json{{"task_id", p.task_id},
              {"persona", persona_name(p.persona)},
              {"chosen", to_json(p.chosen)},
              {"rejected", to_json(p.rejected)}};
}

json to_json(const AlignedPair& ap) {
  json cols = json::array();
  for (const auto& c : ap.columns)
    cols.push_back(json{{"t", c.t},
                        {"chosen", step_or_placeholder(c.chosen)},
                        {"rejected", step_or_placeholder(c.rejected)}});
  return json{{"task_id", ap.task_id}, {"persona", persona_name(ap.persona)}, {"columns", cols}};
}

json to_json(const TaskInstance& t) {
  json dps = json::array();
  for (const auto& dp : t.decision_points)
    dps.push_back(json{{"position", dp.position},
                       {"protective_action", action_name(dp.protective_action)},
                       {"exposing_action", action_name(dp.exposing_action)},
                       {"adds_epilogue", dp.adds_epilogue}});
  json bindings = json::object();
  for (const auto& [a, args] : t.bindings) bindings[std::string(action_name(a))] = args;
  return json{{"task_id", t.task_id},
              {"goal", t.goal},
              {"category", task_category_name(t.category)},
              {"backbone_len", t.backbone_len},
              {"decision_points", dps},
              {"bindings", bindings}};
}

Step step_from_json(const json& j, std::size_t line) {
  Step s;
  s.index = int_field(j, "index", line);
  s.action = action_field(j, "action", line);
  s.args = args_from_json(field(j, "args", line), line);
  s.desc = string_field(j, "desc", line);
  return s;
}

Trajectory trajectory_from_json(const json& j, std::size_t line) {
  Trajectory t;
  t.task_id = string_field(j, "task_id", line);
  t.persona = persona_field(j, line);
  const auto& steps = field(j, "steps", line);
  if (!steps.is_array()) throw SchemaError("'steps' must be an array", line);
  for (const auto& s : steps) t.steps.push_back(step_from_json(s, line));
  return t;
}

PreferencePair pair_from_json(const json& j, std::size_t line) {
  PreferencePair p;
  p.task_id = string_field(j, "task_id", line);
  p.persona = persona_field(j, line);
  p.chosen = trajectory_from_json(field(j, "chosen", line), line);
  p.rejected = trajectory_from_json(field(j, "rejected", line), line);
  return p;
}

AlignedPair aligned_pair_from_json(const json& j, std::size_t line) {
  AlignedPair ap;
  ap.task_id = string_field(j, "task_id", line);
  ap.persona = persona_field(j, line);
  const auto& cols = field(j, "columns", line);
  if (!cols.is_array()) throw SchemaError("'columns' must be an array", line);
  for (const auto& c : cols) {
    AlignedColumn col;
    col.t = int_field(c, "t", line);
    col.chosen = column_side(field(c, "chosen", line), col.t, line);
    col.rejected = column_side(field(c, "rejected", line), col.t, line);
    ap.columns.push_back(std::move(col));
  }
  return ap;
}

TaskInstance task_from_json(const json& j, std::size_t line) {
  TaskInstance t;
  t.task_id = string_field(j, "task_id", line);
  t.goal = string_field(j, "goal", line);
  auto cat = string_field(j, "category", line);
  auto parsed = parse_task_category(cat);
  if (!parsed) throw SchemaError("unknown task category '" + cat + "'", line);
  t.category = *parsed;
  t.backbone_len = int_field(j, "backbone_len", line);
  const auto& dps = field(j, "decision_points", line);
  if (!dps.is_array()) throw SchemaError("'decision_points' must be an array", line);
  for (const auto& d : dps) {
    DecisionPoint dp;
    dp.position = int_field(d, "position", line);
    dp.protective_action = action_field(d, "protective_action", line);
    dp.exposing_action = action_field(d, "exposing_action", line);
    const auto& epi = field(d, "adds_epilogue", line);
    if (!epi.is_boolean()) throw SchemaError("'adds_epilogue' must be a boolean", line);
    dp.adds_epilogue = epi.get<bool>();
    t.decision_points.push_back(dp);
  }
  if (auto it = j.find("bindings"); it != j.end()) {
    if (!it->is_object()) throw SchemaError("'bindings' must be an object", line);
    for (auto b = it->begin(); b != it->end(); ++b) {
      auto a = parse_action(b.key());
      if (!a) throw SchemaError("unknown action '" + b.key() + "' in bindings", line);
      t.bindings[*a] = args_from_json(b.value(), line);
    }
  }
  return t;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Trajectory>& items) {
  for (const auto& t : items)
    if (auto v = validate_trajectory(t); !v.empty())
      throw PreconditionError("write_jsonl: invalid trajectory " + t.task_id + ": " + v.front());
  write_lines(path, items);
}

void write_jsonl(const std::filesystem::path& path, const std::vector<PreferencePair>& items) {
  for (const auto& p : items)
    if (auto v = validate_pair(p); !v.empty())
      throw PreconditionError("write_jsonl: invalid pair " + p.task_id + ": " + v.front());
  write_lines(path, items);
}

void write_jsonl(const std::filesystem::path& path, const std::vector<AlignedPair>& items) {
  for (const auto& ap : items)
    if (auto v = validate_aligned(ap); !v.empty())
      throw PreconditionError("write_jsonl: invalid aligned pair " + ap.task_id + ": " + v.front());
  write_lines(path, items);
}

void write_jsonl(const std::filesystem::path& path, const std::vector<TaskInstance>& items) {
  for (const auto& t : items)
    if (auto v = validate_task(t); !v.empty())
      throw PreconditionError("write_jsonl: invalid task " + t.task_id + ": " + v.front());
  write_lines(path, items);
}

std::vector<Record> read_jsonl(const std::filesystem::path& path) {
  std::vector<Record> out;
  for_each_line(path, [&](const json& j, std::size_t line) {
    if (j.is_object() && j.contains("chosen"))
      out.emplace_back(pair_from_json(j, line));
    else
      out.emplace_back(trajectory_from_json(j, line));
  });
  return out;
}

std::vector<Trajectory> read_trajectories(const std::filesystem::path& path) {
  std::vector<Trajectory> out;
  for_each_line(path, [&](const json& j, std::size_t line) {
    out.push_back(trajectory_from_json(j, line));
  });
  return out;
}

std::vector<PreferencePair> read_pairs(const std::filesystem::path& path) {
  std::vector<PreferencePair> out;
  for_each_line(path, [&](const json& j, std::size_t line) {
    out.push_back(pair_from_json(j, line));
  });
  return out;
}

std::vector<AlignedPair> read_aligned_pairs(const std::filesystem::path& path) {
  std::vector<AlignedPair> out;
  for_each_line(path, [&](const json& j, std::size_t line) {
    out.push_back(aligned_pair_from_json(j, line));
  });
  return out;
}

std::vector<TaskInstance> read_tasks(const std::filesystem::path& path) {
  std::vector<TaskInstance> out;
  for_each_line(path, [&](const json& j, std::size_t line) {
    out.push_back(task_from_json(j, line));
  });
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace tipo
