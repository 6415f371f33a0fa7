#pragma once

// Training objectives: SFT negative log-likelihood, sequence-level DPO,
// step-level DPO, TIPO and its two ablations.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tipo/aligner.hpp"
#include "tipo/intensity.hpp"
#include "tipo/policy.hpp"

namespace tipo {

enum class Method { sft, dpo, step_dpo, tipo, tipo_wo_pw, tipo_wo_pg };

inline constexpr std::array<Method, 6> kAllMethods{Method::sft,      Method::dpo,
                                                   Method::step_dpo, Method::tipo_wo_pw,
                                                   Method::tipo_wo_pg, Method::tipo};

std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view s);
bool is_step_level(Method m);

struct ObjectiveConfig {
  Method method = Method::tipo;
  double beta = 0.5;
  ScoreConfig score;
  // Also gate columns whose rejected side is a placeholder. Off by default.
  bool gate_rejected = false;

  void validate() const;
};

double softplus(double x);
double sigmoid(double x);
// softplus(-z)
double dpo_loss(double z);

struct LossGrad {
  double loss = 0.0;
  Gradient grad;
  double mean_z = 0.0;  // z for dpo, gated-weighted z for step-level methods
};

struct SftExample {
  Trajectory trajectory;
  std::vector<StepContext> contexts;
};

SftExample prepare_sft(const Trajectory& t, const TaskInfo& task, const FeatureTemplate& tmpl);

// Mean over all steps of -log pi(y_t | x_t).
LossGrad sft_loss(const PolicyParams& params, std::span<const SftExample> batch);

// A preference pair with everything that does not depend on parameters
// precomputed: its alignment and branch contexts. Both branches are scored
// under the pair's persona.
struct PreparedPair {
  PreferencePair pair;
  AlignedPair aligned;
  std::vector<StepContext> chosen_contexts;     // raw chosen trajectory
  std::vector<StepContext> rejected_contexts;   // raw rejected trajectory
  std::vector<StepContext> column_chosen;       // per aligned column
  std::vector<StepContext> column_rejected;
};

PreparedPair prepare_pair(const PreferencePair& p, const TaskInfo& task,
                          const FeatureTemplate& tmpl);

double dpo_z(const PolicyParams& params, const ReferencePolicy& ref, const PreparedPair& p,
             double beta);

// Step-level preference score; a placeholder side contributes 0 log-prob.
double step_z(const PolicyParams& params, const ReferencePolicy& ref, const AlignedColumn& col,
              const StepContext& chosen_ctx, const StepContext& rejected_ctx, double beta);

struct ColumnWeight {
  double alpha = 1.0;
  int gate = 1;
};

// (alpha_t, m_t) for column t under the configured method.
ColumnWeight column_weight(const AlignedColumn& col, Persona persona, const ObjectiveConfig& cfg);

// Mean over columns of softplus(-m_t * alpha_t * z_t) for one aligned pair,
// for any step-level method.
LossGrad tipo_loss(const PolicyParams& params, const ReferencePolicy& ref, const PreparedPair& p,
                   const ObjectiveConfig& cfg);

// Mean over pairs of the configured preference objective (dpo or step-level).
LossGrad preference_loss(const PolicyParams& params, const ReferencePolicy& ref,
                         std::span<const PreparedPair> batch, const ObjectiveConfig& cfg);

}  // namespace tipo
