#include "tipo/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "tipo/error.hpp"
#include "tipo/jsonl.hpp"

namespace tipo {
namespace {

constexpr int kMasked = action_id(ActionType::no_action);

std::array<double, kNumActions> logits(const PolicyParams& params, const StepContext& c) {
  const auto fv = featurize(c, params.feature_template());
  std::array<double, kNumActions> z{};
  for (int row : fv.active)
    for (int k = 0; k < kNumActions; ++k) z[k] += params.at(row, k);
  return z;
}

void check_action(ActionType a) {
  if (a == ActionType::no_action)
    throw MaskedActionError("no_action is masked out of the policy head");
}

}  // namespace

TaskInfo task_info(const TaskInstance& task, const FeatureTemplate& tmpl) {
  return TaskInfo{task.category, goal_id(task.goal, tmpl.goal_buckets)};
}

StepContext context_at(const TaskInfo& task, Persona persona, int step_index,
                       std::optional<ActionType> prev, const FeatureTemplate& tmpl) {
  if (step_index < 0) throw PreconditionError("negative step index");
  StepContext c;
  c.persona = persona;
  c.task_category = task.category;
  c.goal_id = task.goal_id;
  c.step_bucket = std::min(step_index, tmpl.step_buckets - 1);
  c.prev_action = prev ? action_id(*prev) : kStartMarker;
  return c;
}

std::vector<StepContext> branch_contexts(const TaskInfo& task, Persona persona,
                                         std::span<const Step> steps,
                                         const FeatureTemplate& tmpl) {
  std::vector<StepContext> out;
  out.reserve(steps.size());
  std::optional<ActionType> prev;
  int real_index = 0;
  for (const auto& s : steps) {
    out.push_back(context_at(task, persona, real_index, prev, tmpl));
    if (!s.is_placeholder()) {
      prev = s.action;
      ++real_index;
    }
  }
  return out;
}

FeatureVector featurize(const StepContext& c, const FeatureTemplate& tmpl) {
  if (c.goal_id < 0 || c.goal_id >= tmpl.goal_buckets)
    throw PreconditionError("goal_id out of range: " + std::to_string(c.goal_id));
  if (c.step_bucket < 0 || c.step_bucket >= tmpl.step_buckets)
    throw PreconditionError("step bucket out of range: " + std::to_string(c.step_bucket));
  if (c.prev_action < 0 || c.prev_action >= kPrevActionSlots)
    throw PreconditionError("prev_action out of range: " + std::to_string(c.prev_action));
  const int persona = static_cast<int>(c.persona);
  const int category = static_cast<int>(c.task_category);
  if (persona < 0 || persona > 1 || category < 0 || category >= kNumTaskCategories)
    throw PreconditionError("persona or task category out of range");
  FeatureVector fv;
  fv.active = {tmpl.persona_offset() + persona,
               tmpl.category_offset() + category,
               tmpl.goal_offset() + c.goal_id,
               tmpl.bucket_offset() + c.step_bucket,
               tmpl.prev_offset() + c.prev_action,
               tmpl.cross_offset() + persona * kPrevActionSlots + c.prev_action};
  return fv;
}

PolicyParams::PolicyParams(FeatureTemplate tmpl)
    : tmpl_(tmpl), weights_(static_cast<std::size_t>(tmpl.dim()) * kNumActions, 0.0) {
  if (tmpl.goal_buckets < 1 || tmpl.step_buckets < 1)
    throw ConfigError("feature template needs at least one goal and step bucket");
}

bool PolicyParams::all_finite() const {
  return std::all_of(weights_.begin(), weights_.end(), [](double w) { return std::isfinite(w); });
}

std::array<double, kNumActions> action_probs(const PolicyParams& params, const StepContext& c) {
  auto z = logits(params, c);
  double mx = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kNumActions; ++k)
    if (k != kMasked) mx = std::max(mx, z[k]);
  double total = 0.0;
  std::array<double, kNumActions> p{};
  for (int k = 0; k < kNumActions; ++k) {
    if (k == kMasked) continue;
    p[k] = std::exp(z[k] - mx);
    total += p[k];
  }
  for (auto& v : p) v /= total;
  return p;
}

double log_prob(const PolicyParams& params, const StepContext& c, ActionType a) {
  check_action(a);
  auto z = logits(params, c);
  double mx = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kNumActions; ++k)
    if (k != kMasked) mx = std::max(mx, z[k]);
  double total = 0.0;
  for (int k = 0; k < kNumActions; ++k)
    if (k != kMasked) total += std::exp(z[k] - mx);
  return z[action_id(a)] - mx - std::log(total);
}

void accumulate_grad_log_prob(const PolicyParams& params, const StepContext& c, ActionType a,
                              double scale, Gradient& grad) {
  check_action(a);
  const auto p = action_probs(params, c);
  const auto fv = featurize(c, params.feature_template());
  const int target = action_id(a);
  for (int row : fv.active) {
    double* g = grad.data() + static_cast<std::size_t>(row) * kNumActions;
    for (int k = 0; k < kNumActions; ++k) {
      if (k == kMasked) continue;
      g[k] += scale * ((k == target ? 1.0 : 0.0) - p[k]);
    }
  }
}

Gradient grad_log_prob(const PolicyParams& params, const StepContext& c, ActionType a) {
  Gradient g(params.size(), 0.0);
  accumulate_grad_log_prob(params, c, a, 1.0, g);
  return g;
}

double traj_log_prob(const PolicyParams& params, const TaskInfo& task, Persona persona,
                     const Trajectory& y) {
  if (y.steps.empty()) throw PreconditionError("traj_log_prob: empty trajectory");
  const auto ctx = branch_contexts(task, persona, y.steps, params.feature_template());
  double total = 0.0;
  for (std::size_t t = 0; t < y.steps.size(); ++t)
    total += log_prob(params, ctx[t], y.steps[t].action);
  return total;
}

double traj_log_prob(const PolicyParams& params, const TaskInstance& task, Persona persona,
                     const Trajectory& y) {
  return traj_log_prob(params, task_info(task, params.feature_template()), persona, y);
}

ReferencePolicy clone_frozen(const PolicyParams& params) { return ReferencePolicy(params); }

std::uint64_t checksum(const PolicyParams& params) {
  std::uint64_t h = 1469598103934665603ull;
  for (double w : params.weights()) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &w, sizeof w);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
  }
  return h;
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params) {
  const auto& tmpl = params.feature_template();
  json j;
  j["header"] = {{"F", tmpl.dim()},
                 {"n_actions", kNumActions},
                 {"feature_template_version", FeatureTemplate::kVersion},
                 {"goal_buckets", tmpl.goal_buckets},
                 {"step_buckets", tmpl.step_buckets}};
  j["weights"] = std::vector<double>(params.weights().begin(), params.weights().end());
  write_text_file(path, j.dump() + "\n");
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    const auto& h = j.at("header");
    if (h.at("feature_template_version").get<int>() != FeatureTemplate::kVersion ||
        h.at("n_actions").get<int>() != kNumActions)
      throw SchemaError("incompatible checkpoint header in " + path.string());
    FeatureTemplate tmpl;
    tmpl.goal_buckets = h.at("goal_buckets").get<int>();
    tmpl.step_buckets = h.at("step_buckets").get<int>();
    if (h.at("F").get<int>() != tmpl.dim())
      throw SchemaError("checkpoint feature dimension does not match its template");
    PolicyParams params(tmpl);
    const auto& w = j.at("weights");
    if (!w.is_array() || w.size() != params.size())
      throw SchemaError("checkpoint weight count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) params.weights()[i] = w[i].get<double>();
    if (!params.all_finite()) throw SchemaError("checkpoint contains non-finite weights");
    return params;
  } catch (const json::exception& e) {
    throw SchemaError("malformed checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace tipo
