#pragma once

// Featurized log-linear action policy pi(a | x) with exact log-probabilities
// and analytic gradients. The no_action head exists in the weight matrix but
// is masked out of the softmax.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tipo/core.hpp"

namespace tipo {

inline constexpr int kStartMarker = kNumActions;  // prev_action before step 0
inline constexpr int kPrevActionSlots = kNumActions + 1;
inline constexpr int kFeatureBlocks = 6;

// One-hot block layout: persona | task category | goal id | step bucket |
// prev action | persona x prev action.
struct FeatureTemplate {
  static constexpr int kVersion = 1;

  int goal_buckets = 16;
  int step_buckets = 12;

  int persona_offset() const { return 0; }
  int category_offset() const { return 2; }
  int goal_offset() const { return 2 + kNumTaskCategories; }
  int bucket_offset() const { return goal_offset() + goal_buckets; }
  int prev_offset() const { return bucket_offset() + step_buckets; }
  int cross_offset() const { return prev_offset() + kPrevActionSlots; }
  int dim() const { return cross_offset() + 2 * kPrevActionSlots; }

  friend bool operator==(const FeatureTemplate&, const FeatureTemplate&) = default;
};

struct StepContext {
  Persona persona = Persona::PrivacyFirst;
  TaskCategory task_category = TaskCategory::BrowsingInteraction;
  int goal_id = 0;
  int step_bucket = 0;
  int prev_action = kStartMarker;  // action id, or kStartMarker

  friend bool operator==(const StepContext&, const StepContext&) = default;
};

struct FeatureVector {
  std::array<int, kFeatureBlocks> active{};
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Per-task part of the context, derived once from a TaskInstance.
struct TaskInfo {
  TaskCategory category = TaskCategory::BrowsingInteraction;
  int goal_id = 0;
};

TaskInfo task_info(const TaskInstance& task, const FeatureTemplate& tmpl);

// Context of the step at `step_index` whose predecessor is `prev`
// (nullopt for the first step).
StepContext context_at(const TaskInfo& task, Persona persona, int step_index,
                       std::optional<ActionType> prev, const FeatureTemplate& tmpl);

// Contexts of every step of `steps` in order. Placeholders are skipped when
// tracking the previous action and get the context of the next real step.
std::vector<StepContext> branch_contexts(const TaskInfo& task, Persona persona,
                                         std::span<const Step> steps,
                                         const FeatureTemplate& tmpl);

FeatureVector featurize(const StepContext& c, const FeatureTemplate& tmpl);

class PolicyParams {
 public:
  explicit PolicyParams(FeatureTemplate tmpl = {});

  const FeatureTemplate& feature_template() const { return tmpl_; }
  int rows() const { return tmpl_.dim(); }
  static constexpr int cols() { return kNumActions; }
  std::size_t size() const { return weights_.size(); }

  double& at(int feature, int action) { return weights_[feature * kNumActions + action]; }
  double at(int feature, int action) const { return weights_[feature * kNumActions + action]; }

  std::span<double> weights() { return weights_; }
  std::span<const double> weights() const { return weights_; }

  bool all_finite() const;
  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;

 private:
  FeatureTemplate tmpl_;
  std::vector<double> weights_;  // row-major, feature x action
};

// Dense gradient in the PolicyParams layout.
using Gradient = std::vector<double>;

// Softmax over the unmasked heads; entry for no_action is exactly 0.
std::array<double, kNumActions> action_probs(const PolicyParams& params, const StepContext& c);

double log_prob(const PolicyParams& params, const StepContext& c, ActionType a);
Gradient grad_log_prob(const PolicyParams& params, const StepContext& c, ActionType a);

// grad += scale * d log pi(a|c) / dW, touching only active rows.
void accumulate_grad_log_prob(const PolicyParams& params, const StepContext& c, ActionType a,
                              double scale, Gradient& grad);

double traj_log_prob(const PolicyParams& params, const TaskInfo& task, Persona persona,
                     const Trajectory& y);
double traj_log_prob(const PolicyParams& params, const TaskInstance& task, Persona persona,
                     const Trajectory& y);

// Read-only snapshot used as the reference policy.
class ReferencePolicy {
 public:
  explicit ReferencePolicy(PolicyParams params) : params_(std::move(params)) {}
  const PolicyParams& params() const { return params_; }

 private:
  PolicyParams params_;
};

ReferencePolicy clone_frozen(const PolicyParams& params);

// FNV-1a over the raw weight bytes.
std::uint64_t checksum(const PolicyParams& params);

// JSON checkpoint: {"header": {F, n_actions, feature_template_version,
// goal_buckets, step_buckets}, "weights": [F*20 reals, row-major]}.
void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params);
PolicyParams load_checkpoint(const std::filesystem::path& path);

}  // namespace tipo
