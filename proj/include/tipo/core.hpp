#pragma once

// Domain types: actions, personas, steps, trajectories, tasks and
// preference pairs.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tipo {

enum class ActionType : std::uint8_t {
  open_app,
  tap,
  type_text,
  scroll,
  back,
  search,
  confirm,
  read_policy,
  grant_permission,
  deny_permission,
  enable_incognito,
  accept_tracking,
  decline_tracking,
  stay_logged_in,
  logout,
  clear_traces,
  save_local,
  save_cloud,
  use_stored_info,
  no_action,
};

inline constexpr int kNumActions = 20;
// Heads the policy can emit: every action except the alignment placeholder.
inline constexpr int kNumPolicyActions = kNumActions - 1;

enum class PrivacyCategory : std::uint8_t { Protective, Exposing, Neutral };

enum class Persona : std::uint8_t { PrivacyFirst, UtilityFirst };
inline constexpr std::array<Persona, 2> kPersonas{Persona::PrivacyFirst,
                                                  Persona::UtilityFirst};

enum class TaskCategory : std::uint8_t {
  BrowsingInteraction,
  AccountFile,
  Transactional,
};
inline constexpr int kNumTaskCategories = 3;
inline constexpr std::array<TaskCategory, 3> kTaskCategories{
    TaskCategory::BrowsingInteraction, TaskCategory::AccountFile,
    TaskCategory::Transactional};

constexpr int action_id(ActionType a) { return static_cast<int>(a); }
ActionType action_from_id(int id);

std::string_view action_name(ActionType a);
// Returns nullopt for strings outside the closed vocabulary.
std::optional<ActionType> parse_action(std::string_view name);

PrivacyCategory category_of(ActionType a);
std::string_view category_name(PrivacyCategory c);

std::string_view persona_name(Persona p);  // "privacy_first" / "utility_first"
std::optional<Persona> parse_persona(std::string_view s);
constexpr Persona opposite(Persona p) {
  return p == Persona::PrivacyFirst ? Persona::UtilityFirst
                                    : Persona::PrivacyFirst;
}

std::string_view task_category_name(TaskCategory c);   // "browsing_interaction"
std::string_view task_category_label(TaskCategory c);  // "B&I"
std::optional<TaskCategory> parse_task_category(std::string_view s);

using Args = std::map<std::string, std::string>;

struct Step {
  int index = 0;
  ActionType action = ActionType::no_action;
  Args args;
  std::string desc;

  // Derived from the static table, never stored.
  PrivacyCategory category() const { return category_of(action); }
  bool is_placeholder() const { return action == ActionType::no_action; }

  friend bool operator==(const Step&, const Step&) = default;
};

Step placeholder_step(int index);

struct Trajectory {
  std::string task_id;
  Persona persona = Persona::PrivacyFirst;
  std::vector<Step> steps;

  std::size_t size() const { return steps.size(); }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// One entry per violated invariant; empty when the trajectory is well formed.
std::vector<std::string> validate_trajectory(const Trajectory& t);

struct DecisionPoint {
  int position = 0;  // backbone index the decision is inserted before
  ActionType protective_action = ActionType::deny_permission;
  ActionType exposing_action = ActionType::grant_permission;
  bool adds_epilogue = false;

  friend bool operator==(const DecisionPoint&, const DecisionPoint&) = default;
};

bool valid_decision_pair(ActionType protective, ActionType exposing);

struct TaskInstance {
  std::string task_id;
  std::string goal;
  TaskCategory category = TaskCategory::BrowsingInteraction;
  std::vector<DecisionPoint> decision_points;
  int backbone_len = 1;
  // UI grounding surrogate: the arguments an action resolves to in this task.
  std::map<ActionType, Args> bindings;

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

std::vector<std::string> validate_task(const TaskInstance& t);

// Builds a step for `action` grounded in the task's bindings.
Step ground_step(const TaskInstance& task, ActionType action, int index);
std::string describe(ActionType action, const Args& args);

// Stable goal-template hash folded into [0, buckets).
int goal_id(std::string_view goal, int buckets);

struct PreferencePair {
  std::string task_id;
  Persona persona = Persona::PrivacyFirst;
  Trajectory chosen;
  Trajectory rejected;

  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
};

std::vector<std::string> validate_pair(const PreferencePair& p);

}  // namespace tipo
