#pragma once

// Seeded generator of persona-branching GUI tasks. Every task has a shared
// neutral backbone; decision points become a protective action in the
// Privacy-first branch and an exposing one in the Utility-first branch, and
// Privacy-first may append defensive epilogue steps before the final confirm.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tipo/core.hpp"

namespace tipo {

struct GenConfig {
  int n_tasks = 150;
  std::array<double, 3> category_mix{1.0, 1.0, 1.0};
  std::array<int, 2> backbone_len_range{3, 7};
  std::array<int, 2> decision_points_range{1, 3};
  double epilogue_prob = 0.6;
  std::uint64_t seed = 7;
  std::array<double, 3> split{0.6, 0.1, 0.3};  // train / val / test

  void validate() const;  // throws ConfigError
};

struct TrajectoryPair {
  Trajectory privacy_first;
  Trajectory utility_first;

  const Trajectory& of(Persona p) const {
    return p == Persona::PrivacyFirst ? privacy_first : utility_first;
  }
};

struct Splits {
  std::vector<std::string> train, val, test;
};

struct Dataset {
  std::vector<TaskInstance> tasks;
  std::vector<TrajectoryPair> pairs;  // parallel to tasks
  Splits splits;
};

Dataset generate(const GenConfig& cfg);

// Generates the task and both reference branches for one task index.
std::pair<TaskInstance, TrajectoryPair> generate_task(const GenConfig& cfg, int task_index);

// chosen = the branch of persona p, rejected = the other branch.
PreferencePair make_preference_pair(const TrajectoryPair& pair, Persona p);

// Both personas' pairs for every task, Privacy-first first.
std::vector<PreferencePair> build_preference_pairs(const std::vector<TrajectoryPair>& pairs);
std::vector<PreferencePair> build_preference_pairs(const std::vector<TrajectoryPair>& pairs,
                                                   Persona persona);

// Re-pairs a flat trajectory list by task_id; throws DataError when a task
// does not have exactly one trajectory per persona.
std::vector<TrajectoryPair> pair_trajectories(const std::vector<Trajectory>& trajectories);

// task_ids that appear in more than one split, or in none of them.
std::vector<std::string> split_leaks(const Splits& s, const std::vector<TaskInstance>& tasks);

}  // namespace tipo
