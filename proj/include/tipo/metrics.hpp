#pragma once

// Evaluation: greedy trajectory generation and the persona metric suite
// (SR, PAS-S / PAS-U, Compliance / Non-compliance, PD).

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tipo/policy.hpp"
#include "tipo/synthgen.hpp"

namespace tipo {

inline constexpr int kDefaultMaxLen = 16;

// Greedy argmax decoding (ties -> lowest action id); stops after `confirm`
// or at max_len steps. Steps are grounded through the task's bindings.
Trajectory generate_trajectory(const PolicyParams& params, const TaskInstance& task,
                               Persona persona, int max_len = kDefaultMaxLen);

// Stage 1: action types equal. Stage 2: match keys equal.
bool step_match(const Step& gen, const Step& ref);

// Positional match count over the reference length; missing tail = mismatch.
double success_rate(const Trajectory& gen, const Trajectory& ref);

struct PasScore {
  std::optional<double> pas_s;
  std::optional<double> pas_u;
};

// Recall (x100) of the Privacy-first reference's protective steps and the
// Utility-first reference's exposing steps inside `gen`, multiset semantics.
PasScore pas(const Trajectory& gen, const TrajectoryPair& refs);

bool persona_distinction(const Trajectory& gen_pf, const Trajectory& gen_uf,
                         int max_len = kDefaultMaxLen);

struct TaskRecord {
  TaskInstance task;
  TrajectoryPair refs;
};

// Records of the given task ids, in id order. Throws DataError when a task
// or its references are missing.
std::vector<TaskRecord> select_tasks(const Dataset& ds, const std::vector<std::string>& ids);

struct TaskEval {
  std::string task_id;
  TaskCategory category = TaskCategory::BrowsingInteraction;
  std::array<Trajectory, 2> generated;  // indexed by Persona
  std::array<double, 2> sr{};
  std::array<PasScore, 2> pas;
  bool pd = false;
};

struct Aggregate {
  int n_tasks = 0;
  std::array<double, 2> sr{};  // per persona
  double sr_overall = 0.0;     // mean of the two persona means
  // [persona] -> mean over tasks where the score is present
  std::array<std::optional<double>, 2> pas_s, pas_u;
  double compliance = 0.0;
  double non_compliance = 0.0;
  double pd = 0.0;
};

struct EvalResult {
  std::string method;
  std::vector<TaskEval> tasks;
  Aggregate overall;
  std::map<TaskCategory, Aggregate> by_category;
};

using Generator = std::function<Trajectory(const TaskRecord&, Persona)>;

EvalResult evaluate_with(std::span<const TaskRecord> records, const Generator& gen,
                         int max_len = kDefaultMaxLen, std::string method = {});

EvalResult evaluate(const PolicyParams& params, std::span<const TaskRecord> records,
                    int max_len = kDefaultMaxLen, std::string method = {});

// Task-order invariant: tasks are aggregated in task_id order.
Aggregate aggregate(std::span<const TaskEval> tasks);

// report.csv, summary.csv and categories.csv in `dir`.
void emit_report(const std::vector<EvalResult>& results, const std::filesystem::path& dir);
std::string report_csv(const std::vector<EvalResult>& results);
std::string summary_csv(const std::vector<EvalResult>& results);
std::string categories_csv(const std::vector<EvalResult>& results);

// Methods x metrics table followed by a categories x metrics table.
std::string format_tables(const std::vector<EvalResult>& results);

std::string format_number(double v);
std::string format_optional(const std::optional<double>& v);

}  // namespace tipo
