#include "tipo/objectives.hpp"

#include <cmath>

#include "tipo/error.hpp"

namespace tipo {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::sft: return "sft";
    case Method::dpo: return "dpo";
    case Method::step_dpo: return "step_dpo";
    case Method::tipo: return "tipo";
    case Method::tipo_wo_pw: return "tipo_wo_pw";
    case Method::tipo_wo_pg: return "tipo_wo_pg";
  }
  return "";
}

std::optional<Method> parse_method(std::string_view s) {
  for (auto m : kAllMethods)
    if (method_name(m) == s) return m;
  return std::nullopt;
}

bool is_step_level(Method m) {
  return m == Method::step_dpo || m == Method::tipo || m == Method::tipo_wo_pw ||
         m == Method::tipo_wo_pg;
}

void ObjectiveConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("objective beta must be > 0");
  score.validate();
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double dpo_loss(double z) { return softplus(-z); }

SftExample prepare_sft(const Trajectory& t, const TaskInfo& task, const FeatureTemplate& tmpl) {
  if (auto v = validate_trajectory(t); !v.empty())
    throw PreconditionError("sft example " + t.task_id + ": " + v.front());
  return SftExample{t, branch_contexts(task, t.persona, t.steps, tmpl)};
}

LossGrad sft_loss(const PolicyParams& params, std::span<const SftExample> batch) {
  if (batch.empty()) throw PreconditionError("sft_loss: empty batch");
  LossGrad out{0.0, Gradient(params.size(), 0.0), 0.0};
  std::size_t n = 0;
  for (const auto& ex : batch) n += ex.trajectory.size();
  const double inv = 1.0 / static_cast<double>(n);
  for (const auto& ex : batch) {
    for (std::size_t t = 0; t < ex.trajectory.size(); ++t) {
      const auto a = ex.trajectory.steps[t].action;
      out.loss -= log_prob(params, ex.contexts[t], a) * inv;
      accumulate_grad_log_prob(params, ex.contexts[t], a, -inv, out.grad);
    }
  }
  return out;
}

PreparedPair prepare_pair(const PreferencePair& p, const TaskInfo& task,
                          const FeatureTemplate& tmpl) {
  if (auto v = validate_pair(p); !v.empty())
    throw PreconditionError("preference pair " + p.task_id + ": " + v.front());
  PreparedPair out;
  out.pair = p;
  out.aligned = align_pair(p);
  out.chosen_contexts = branch_contexts(task, p.persona, p.chosen.steps, tmpl);
  out.rejected_contexts = branch_contexts(task, p.persona, p.rejected.steps, tmpl);
  std::vector<Step> cs, rs;
  for (const auto& c : out.aligned.columns) {
    cs.push_back(c.chosen);
    rs.push_back(c.rejected);
  }
  out.column_chosen = branch_contexts(task, p.persona, cs, tmpl);
  out.column_rejected = branch_contexts(task, p.persona, rs, tmpl);
  return out;
}

namespace {

double seq_log_prob(const PolicyParams& params, const Trajectory& y,
                    const std::vector<StepContext>& ctx) {
  double total = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) total += log_prob(params, ctx[t], y.steps[t].action);
  return total;
}

double side_log_prob(const PolicyParams& params, const Step& s, const StepContext& c) {
  return s.is_placeholder() ? 0.0 : log_prob(params, c, s.action);
}

}  // namespace

double dpo_z(const PolicyParams& params, const ReferencePolicy& ref, const PreparedPair& p,
             double beta) {
  const auto& r = ref.params();
  const double policy = seq_log_prob(params, p.pair.chosen, p.chosen_contexts) -
                        seq_log_prob(params, p.pair.rejected, p.rejected_contexts);
  const double reference = seq_log_prob(r, p.pair.chosen, p.chosen_contexts) -
                           seq_log_prob(r, p.pair.rejected, p.rejected_contexts);
  return beta * (policy - reference);
}

double step_z(const PolicyParams& params, const ReferencePolicy& ref, const AlignedColumn& col,
              const StepContext& chosen_ctx, const StepContext& rejected_ctx, double beta) {
  const auto& r = ref.params();
  const double policy = side_log_prob(params, col.chosen, chosen_ctx) -
                        side_log_prob(params, col.rejected, rejected_ctx);
  const double reference =
      side_log_prob(r, col.chosen, chosen_ctx) - side_log_prob(r, col.rejected, rejected_ctx);
  return beta * (policy - reference);
}

ColumnWeight column_weight(const AlignedColumn& col, Persona persona, const ObjectiveConfig& cfg) {
  const bool use_alpha = cfg.method == Method::tipo || cfg.method == Method::tipo_wo_pg;
  const bool use_gate = cfg.method == Method::tipo || cfg.method == Method::tipo_wo_pw;
  ColumnWeight w;
  if (use_alpha) w.alpha = intensity_weight(delta_score(col, persona, cfg.score), cfg.score);
  if (use_gate) {
    w.gate = padding_gate(col);
    if (cfg.gate_rejected && col.rejected.is_placeholder()) w.gate = 0;
  }
  return w;
}

LossGrad tipo_loss(const PolicyParams& params, const ReferencePolicy& ref, const PreparedPair& p,
                   const ObjectiveConfig& cfg) {
  if (!is_step_level(cfg.method))
    throw ConfigError("tipo_loss requires a step-level method, got " +
                      std::string(method_name(cfg.method)));
  const auto& cols = p.aligned.columns;
  LossGrad out{0.0, Gradient(params.size(), 0.0), 0.0};
  const double inv = 1.0 / static_cast<double>(cols.size());
  for (std::size_t t = 0; t < cols.size(); ++t) {
    const auto& col = cols[t];
    const auto w = column_weight(col, p.pair.persona, cfg);
    const double scale = w.gate * w.alpha;
    if (scale == 0.0) {
      out.loss += softplus(0.0) * inv;  // constant, no gradient
      continue;
    }
    const double z = step_z(params, ref, col, p.column_chosen[t], p.column_rejected[t], cfg.beta);
    const double zh = scale * z;
    out.loss += softplus(-zh) * inv;
    out.mean_z += zh * inv;
    // d softplus(-zh) / d theta = -sigmoid(-zh) * scale * beta * d(lp+ - lp-)
    const double coef = -sigmoid(-zh) * scale * cfg.beta * inv;
    if (!col.chosen.is_placeholder())
      accumulate_grad_log_prob(params, p.column_chosen[t], col.chosen.action, coef, out.grad);
    if (!col.rejected.is_placeholder())
      accumulate_grad_log_prob(params, p.column_rejected[t], col.rejected.action, -coef, out.grad);
  }
  return out;
}

LossGrad preference_loss(const PolicyParams& params, const ReferencePolicy& ref,
                         std::span<const PreparedPair> batch, const ObjectiveConfig& cfg) {
  if (batch.empty()) throw PreconditionError("preference_loss: empty batch");
  if (cfg.method == Method::sft) throw ConfigError("preference_loss: sft is not a preference objective");
  LossGrad out{0.0, Gradient(params.size(), 0.0), 0.0};
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& p : batch) {
    if (cfg.method == Method::dpo) {
      const double z = dpo_z(params, ref, p, cfg.beta);
      out.loss += dpo_loss(z) * inv;
      out.mean_z += z * inv;
      const double coef = -sigmoid(-z) * cfg.beta * inv;
      for (std::size_t t = 0; t < p.pair.chosen.size(); ++t)
        accumulate_grad_log_prob(params, p.chosen_contexts[t], p.pair.chosen.steps[t].action,
                                 coef, out.grad);
      for (std::size_t t = 0; t < p.pair.rejected.size(); ++t)
        accumulate_grad_log_prob(params, p.rejected_contexts[t], p.pair.rejected.steps[t].action,
                                 -coef, out.grad);
      continue;
    }
    auto lg = tipo_loss(params, ref, p, cfg);
    out.loss += lg.loss * inv;
    out.mean_z += lg.mean_z * inv;
    for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += lg.grad[i] * inv;
  }
  return out;
}

}  // namespace tipo
