#include "tipo/core.hpp"

#include <set>

#include "tipo/error.hpp"

namespace tipo {
namespace {

constexpr std::array<std::string_view, kNumActions> kActionNames{
    "open_app",        "tap",              "type_text",      "scroll",
    "back",            "search",           "confirm",        "read_policy",
    "grant_permission", "deny_permission", "enable_incognito", "accept_tracking",
    "decline_tracking", "stay_logged_in",  "logout",         "clear_traces",
    "save_local",      "save_cloud",       "use_stored_info", "no_action",
};

using enum PrivacyCategory;
constexpr std::array<PrivacyCategory, kNumActions> kCategoryTable{
    Neutral,    Neutral,    Neutral,    Neutral,    Neutral,
    Neutral,    Neutral,    Protective, Exposing,   Protective,
    Protective, Exposing,   Protective, Exposing,   Protective,
    Protective, Protective, Exposing,   Exposing,   Neutral,
};

constexpr int count_category(PrivacyCategory c) {
  int n = 0;
  for (auto v : kCategoryTable) n += v == c;
  return n;
}
static_assert(count_category(Protective) == 7);
static_assert(count_category(Exposing) == 5);
static_assert(kCategoryTable[kNumActions - 1] == Neutral, "no_action is Neutral");

}  // namespace

ActionType action_from_id(int id) {
  if (id < 0 || id >= kNumActions)
    throw PreconditionError("action id out of range: " + std::to_string(id));
  return static_cast<ActionType>(id);
}

std::string_view action_name(ActionType a) { return kActionNames[action_id(a)]; }

std::optional<ActionType> parse_action(std::string_view name) {
  for (int i = 0; i < kNumActions; ++i)
    if (kActionNames[i] == name) return static_cast<ActionType>(i);
  return std::nullopt;
}

PrivacyCategory category_of(ActionType a) { return kCategoryTable[action_id(a)]; }

std::string_view category_name(PrivacyCategory c) {
  switch (c) {
    case Protective: return "protective";
    case Exposing: return "exposing";
    case Neutral: return "neutral";
  }
  return "neutral";
}

std::string_view persona_name(Persona p) {
  return p == Persona::PrivacyFirst ? "privacy_first" : "utility_first";
}

std::optional<Persona> parse_persona(std::string_view s) {
  if (s == "privacy_first") return Persona::PrivacyFirst;
  if (s == "utility_first") return Persona::UtilityFirst;
  return std::nullopt;
}

std::string_view task_category_name(TaskCategory c) {
  switch (c) {
    case TaskCategory::BrowsingInteraction: return "browsing_interaction";
    case TaskCategory::AccountFile: return "account_file";
    case TaskCategory::Transactional: return "transactional";
  }
  return "";
}

std::string_view task_category_label(TaskCategory c) {
  switch (c) {
    case TaskCategory::BrowsingInteraction: return "B&I";
    case TaskCategory::AccountFile: return "A&F";
    case TaskCategory::Transactional: return "Trans";
  }
  return "";
}

std::optional<TaskCategory> parse_task_category(std::string_view s) {
  for (auto c : kTaskCategories)
    if (task_category_name(c) == s || task_category_label(c) == s) return c;
  return std::nullopt;
}

Step placeholder_step(int index) {
  return Step{index, ActionType::no_action, {}, "no corresponding step"};
}

std::vector<std::string> validate_trajectory(const Trajectory& t) {
  std::vector<std::string> out;
  if (t.steps.empty()) out.emplace_back("empty trajectory");
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    if (t.steps[i].is_placeholder())
      out.push_back("no_action in raw trajectory at index " + std::to_string(i));
    if (t.steps[i].index != static_cast<int>(i))
      out.push_back("non-contiguous index at position " + std::to_string(i));
  }
  return out;
}

bool valid_decision_pair(ActionType protective, ActionType exposing) {
  const auto p = category_of(protective);
  const auto e = category_of(exposing);
  if (protective == ActionType::no_action || exposing == ActionType::no_action)
    return false;
  return p != Exposing && e != Protective && !(p == Neutral && e == Neutral);
}

std::vector<std::string> validate_task(const TaskInstance& t) {
  std::vector<std::string> out;
  if (t.decision_points.empty()) out.emplace_back("task has no decision points");
  if (t.backbone_len < 1) out.emplace_back("backbone_len must be positive");
  std::set<int> seen;
  for (const auto& dp : t.decision_points) {
    if (!valid_decision_pair(dp.protective_action, dp.exposing_action))
      out.push_back("decision point at " + std::to_string(dp.position) +
                    " does not oppose protective and exposing behaviour");
    if (dp.position < 0 || dp.position > t.backbone_len)
      out.push_back("decision point position out of range: " +
                    std::to_string(dp.position));
    if (!seen.insert(dp.position).second)
      out.push_back("duplicate decision point position " +
                    std::to_string(dp.position));
  }
  return out;
}

std::string describe(ActionType action, const Args& args) {
  std::string d{action_name(action)};
  for (const char* key : {"target", "name", "query", "text", "direction"}) {
    if (auto it = args.find(key); it != args.end()) {
      d += " ";
      d += it->second;
      break;
    }
  }
  return d;
}

Step ground_step(const TaskInstance& task, ActionType action, int index) {
  Step s{index, action, {}, {}};
  if (auto it = task.bindings.find(action); it != task.bindings.end())
    s.args = it->second;
  s.desc = describe(action, s.args);
  return s;
}

int goal_id(std::string_view goal, int buckets) {
  if (buckets <= 0) throw PreconditionError("goal bucket count must be positive");
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : goal) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return static_cast<int>(h % static_cast<std::uint64_t>(buckets));
}

std::vector<std::string> validate_pair(const PreferencePair& p) {
  std::vector<std::string> out;
  if (p.chosen.persona != p.persona)
    out.emplace_back("chosen persona differs from pair persona");
  if (p.rejected.persona != opposite(p.persona))
    out.emplace_back("rejected persona is not the opposite persona");
  if (p.chosen.task_id != p.task_id || p.rejected.task_id != p.task_id)
    out.emplace_back("task_id mismatch inside pair");
  for (const auto& v : validate_trajectory(p.chosen)) out.push_back("chosen: " + v);
  for (const auto& v : validate_trajectory(p.rejected)) out.push_back("rejected: " + v);
  return out;
}

}  // namespace tipo
