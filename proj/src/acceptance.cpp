#include "tipo/acceptance.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>

#include "tipo/aligner.hpp"
#include "tipo/fixtures.hpp"
#include "tipo/intensity.hpp"
#include "tipo/objectives.hpp"

namespace tipo::acceptance {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

// |a - n| / max(|a|, |n|, floor). A central difference of an O(1) loss has
// an absolute resolution near 1e-11, so below the floor the comparison is
// effectively an absolute one (1e-5 * 1e-4 = 1e-9).
double rel_error(double analytic, double numeric) {
  constexpr double kFloor = 1e-4;
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kFloor});
}

using LossFn = std::function<LossGrad(const PolicyParams&)>;

// Worst relative error over `probes` coordinates in rows touched by the batch.
double worst_probe(const LossFn& f, const PolicyParams& theta, const std::vector<int>& rows,
                   Rng& rng, int probes) {
  constexpr double eps = 1e-5;
  const auto analytic = f(theta).grad;
  double worst = 0.0;
  for (int k = 0; k < probes; ++k) {
    const int row = rows[rng.index(rows.size())];
    const int col = static_cast<int>(rng.index(kNumActions));
    PolicyParams plus = theta, minus = theta;
    plus.at(row, col) += eps;
    minus.at(row, col) -= eps;
    const double numeric = (f(plus).loss - f(minus).loss) / (2 * eps);
    worst = std::max(worst, rel_error(analytic[row * kNumActions + col], numeric));
  }
  return worst;
}

void add_rows(std::set<int>& rows, const std::vector<StepContext>& cs, const FeatureTemplate& tmpl) {
  for (const auto& c : cs)
    for (int i : featurize(c, tmpl).active) rows.insert(i);
}

double step_dpo_oracle(const PolicyParams& theta, const ReferencePolicy& ref,
                       const std::vector<PreparedPair>& batch, double beta) {
  double total = 0.0;
  for (const auto& p : batch) {
    double pair_loss = 0.0;
    const auto& cols = p.aligned.columns;
    for (std::size_t t = 0; t < cols.size(); ++t) {
      auto ratio = [&](const Step& s, const StepContext& c) {
        if (s.is_placeholder()) return 0.0;
        return log_prob(theta, c, s.action) - log_prob(ref.params(), c, s.action);
      };
      const double z =
          beta * (ratio(cols[t].chosen, p.column_chosen[t]) - ratio(cols[t].rejected, p.column_rejected[t]));
      pair_loss += std::log1p(std::exp(-z));
    }
    total += pair_loss / static_cast<double>(cols.size());
  }
  return total / static_cast<double>(batch.size());
}

bool bitwise_equal(const Gradient& a, const Gradient& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Exhaustive maximum of matched columns over every placeholder set; also
// returns the lexicographically smallest maximizing set.
std::pair<std::size_t, std::vector<int>> brute_force_alignment(const PreferencePair& p) {
  const auto& a = p.chosen.steps;
  const auto& b = p.rejected.steps;
  const bool chosen_short = a.size() < b.size();
  const auto& longer = chosen_short ? b : a;
  const auto& shorter = chosen_short ? a : b;
  const int T = static_cast<int>(longer.size());
  const int gaps = T - static_cast<int>(shorter.size());
  std::size_t best = 0;
  std::vector<int> best_set;
  bool found = false;
  for (unsigned mask = 0; mask < (1u << T); ++mask) {
    if (std::popcount(mask) != gaps) continue;
    std::vector<int> set;
    std::size_t matched = 0;
    int j = 0;
    for (int t = 0; t < T; ++t) {
      if (mask >> t & 1u) {
        set.push_back(t);
        continue;
      }
      matched += match_key(longer[t]) == match_key(shorter[j]);
      ++j;
    }
    if (!found || matched > best || (matched == best && set < best_set)) {
      best = matched;
      best_set = set;
      found = true;
    }
  }
  return {best, best_set};
}

std::vector<int> placeholder_columns(const AlignedPair& ap) {
  std::vector<int> out;
  for (const auto& c : ap.columns)
    if (c.chosen.is_placeholder() || c.rejected.is_placeholder()) out.push_back(c.t);
  return out;
}

}  // namespace

AcceptanceCheck gradient_fidelity(std::uint64_t seed, int probes) {
  const auto t0 = Clock::now();
  const FeatureTemplate tmpl;
  Rng rng(hash_seed(seed, 1));
  auto batch = fixtures::generated_batch(4, seed);
  auto extra = fixtures::random_prepared(rng, 4, 6);
  batch.pairs.insert(batch.pairs.end(), extra.begin(), extra.end());

  std::set<int> row_set;
  for (const auto& p : batch.pairs) {
    add_rows(row_set, p.chosen_contexts, tmpl);
    add_rows(row_set, p.rejected_contexts, tmpl);
  }
  for (const auto& ex : batch.sft) add_rows(row_set, ex.contexts, tmpl);
  const std::vector<int> rows(row_set.begin(), row_set.end());

  const auto theta = fixtures::random_params(rng, 0.5);
  const ReferencePolicy ref(fixtures::random_params(rng, 0.5));

  std::ostringstream detail;
  double overall = 0.0;
  for (auto m : kAllMethods) {
    ObjectiveConfig cfg;
    cfg.method = m;
    LossFn f = [&](const PolicyParams& w) {
      return m == Method::sft ? sft_loss(w, batch.sft) : preference_loss(w, ref, batch.pairs, cfg);
    };
    const double worst = worst_probe(f, theta, rows, rng, probes);
    overall = std::max(overall, worst);
    detail << method_name(m) << ' ' << sci(worst) << ", ";
  }

  double policy_worst = 0.0;
  for (int k = 0; k < 2 * probes; ++k) {
    const auto c = fixtures::random_context(rng, tmpl);
    const auto a = action_from_id(static_cast<int>(rng.index(kNumPolicyActions)));
    const auto fv = featurize(c, tmpl);
    const std::vector<int> active(fv.active.begin(), fv.active.end());
    LossFn f = [&](const PolicyParams& w) {
      return LossGrad{log_prob(w, c, a), grad_log_prob(w, c, a), 0.0};
    };
    policy_worst = std::max(policy_worst, worst_probe(f, theta, active, rng, 1));
  }
  overall = std::max(overall, policy_worst);
  detail << "log_prob " << sci(policy_worst) << "; " << sci(seconds_since(t0)) << " s";
  const bool ok = overall < 1e-5 && seconds_since(t0) < 10.0;
  return {"gradient fidelity", ok, "max rel err " + sci(overall) + " (" + detail.str() + ")", 1};
}

AcceptanceCheck gate_nullification(std::uint64_t seed) {
  Rng rng(hash_seed(seed, 1));
  const auto batch = fixtures::generated_batch(30, seed);
  const auto theta = fixtures::random_params(rng, 0.5);
  const ReferencePolicy ref(fixtures::random_params(rng, 0.5));
  ObjectiveConfig cfg;
  cfg.method = Method::tipo;

  int gated = 0;
  bool ok = true;
  std::string why;
  for (const auto& p : batch.pairs) {
    PreparedPair only_gated = p;
    only_gated.aligned.columns.clear();
    only_gated.column_chosen.clear();
    only_gated.column_rejected.clear();
    PreparedPair perturbed = p;
    for (std::size_t t = 0; t < p.aligned.columns.size(); ++t) {
      const auto& col = p.aligned.columns[t];
      if (!col.chosen.is_placeholder()) continue;
      ++gated;
      only_gated.aligned.columns.push_back(col);
      only_gated.column_chosen.push_back(p.column_chosen[t]);
      only_gated.column_rejected.push_back(p.column_rejected[t]);
      // Any other real action on the rejected side must not matter.
      auto& r = perturbed.aligned.columns[t].rejected;
      r.action = r.action == ActionType::tap ? ActionType::accept_tracking : ActionType::tap;
    }
    if (only_gated.aligned.columns.empty()) continue;

    const auto iso = tipo_loss(theta, ref, only_gated, cfg);
    if (!bitwise_equal(iso.grad, Gradient(theta.size(), 0.0))) {
      ok = false;
      why = "nonzero gradient from gated columns of " + p.pair.task_id;
    }
    if (iso.loss != std::log(2.0)) {
      ok = false;
      why = "gated columns of " + p.pair.task_id + " do not contribute log 2";
    }
    const auto base = tipo_loss(theta, ref, p, cfg);
    const auto moved = tipo_loss(theta, ref, perturbed, cfg);
    if (!bitwise_equal(base.grad, moved.grad) || base.loss != moved.loss) {
      ok = false;
      why = "rejected side of a gated column changed the loss of " + p.pair.task_id;
    }
  }
  if (gated == 0) {
    ok = false;
    why = "no gated columns in the probe batch";
  }
  return {"gate nullification", ok,
          ok ? std::to_string(gated) + " gated columns, gradient contribution bitwise zero" : why, 3};
}

AcceptanceCheck reduction_identity(std::uint64_t seed, int batches) {
  using enum ActionType;
  Rng rng(hash_seed(seed, 1));
  const std::vector<ActionType> protective{read_policy, deny_permission, enable_incognito,
                                           decline_tracking, logout, clear_traces, save_local};
  const std::vector<ActionType> exposing{grant_permission, accept_tracking, stay_logged_in,
                                         save_cloud, use_stored_info};
  double worst_tipo = 0.0, worst_step = 0.0;
  for (int b = 0; b < batches; ++b) {
    const auto theta = fixtures::random_params(rng, 0.5);
    const ReferencePolicy ref(fixtures::random_params(rng, 0.5));
    ObjectiveConfig cfg;

    // Every column opposes an aligned action to a conflicting one:
    // delta = delta_max, so alpha = 1, and no placeholders, so gate = 1.
    std::vector<PreparedPair> strong;
    for (int i = 0; i < 4; ++i) {
      const auto persona = kPersonas[rng.index(2)];
      const bool pf = persona == Persona::PrivacyFirst;
      const int len = rng.uniform_int(1, 6);
      PreferencePair p{"task_rand", persona,
                       fixtures::random_trajectory(rng, len, persona, pf ? protective : exposing),
                       fixtures::random_trajectory(rng, len, opposite(persona), pf ? exposing : protective)};
      const TaskInfo info{kTaskCategories[rng.index(3)], static_cast<int>(rng.index(16))};
      strong.push_back(prepare_pair(p, info, theta.feature_template()));
    }
    cfg.method = Method::tipo;
    worst_tipo = std::max(worst_tipo, std::abs(preference_loss(theta, ref, strong, cfg).loss -
                                               step_dpo_oracle(theta, ref, strong, cfg.beta)));

    const auto mixed = fixtures::random_prepared(rng, 4, 7);
    cfg.method = Method::step_dpo;
    worst_step = std::max(worst_step, std::abs(preference_loss(theta, ref, mixed, cfg).loss -
                                               step_dpo_oracle(theta, ref, mixed, cfg.beta)));
  }
  const bool ok = worst_tipo <= 1e-12 && worst_step <= 1e-12;
  return {"reduction identity", ok,
          "max |tipo(alpha=1,m=1) - step_dpo| " + sci(worst_tipo) + ", max |step_dpo - formula| " +
              sci(worst_step) + " over " + std::to_string(batches) + " batches",
          4};
}

AcceptanceCheck alignment_oracle(std::uint64_t seed) {
  const auto t0 = Clock::now();
  Rng rng(hash_seed(seed, 1));
  int checked = 0, count_mismatch = 0, tie_mismatch = 0;
  for (int i = 0; i < 500; ++i) {
    const auto p = fixtures::random_pair(rng, 10);
    if (std::max(p.chosen.size(), p.rejected.size()) > 8) continue;
    ++checked;
    const auto ap = align_pair(p);
    const auto [best, best_set] = brute_force_alignment(p);
    count_mismatch += matched_columns(ap) != best;
    tie_mismatch += placeholder_columns(ap) != best_set;
  }
  int recovery_fail = 0, length_fail = 0, double_gap = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = fixtures::random_pair(rng, 14);
    const auto ap = align_pair(p);
    recovery_fail += strip_chosen(ap) != p.chosen || strip_rejected(ap) != p.rejected;
    length_fail += ap.size() != std::max(p.chosen.size(), p.rejected.size());
    for (const auto& c : ap.columns) double_gap += c.chosen.is_placeholder() && c.rejected.is_placeholder();
  }
  const double secs = seconds_since(t0);
  const bool ok = count_mismatch == 0 && tie_mismatch == 0 && recovery_fail == 0 && length_fail == 0 &&
                  double_gap == 0 && checked > 0 && secs < 30.0;
  std::ostringstream os;
  os << checked << " pairs vs enumeration: " << count_mismatch << " count mismatches, " << tie_mismatch
     << " tie-break mismatches; 1000 pairs: " << recovery_fail << " recovery failures, " << length_fail
     << " length failures, " << double_gap << " double placeholders; " << sci(secs) << " s";
  return {"alignment oracle", ok, os.str(), 5};
}

AcceptanceCheck weight_function(std::uint64_t seed, int samples) {
  Rng rng(hash_seed(seed, 1));
  int range = 0, monotone = 0, low = 0, high = 0;
  for (int i = 0; i < samples; ++i) {
    ScoreConfig cfg;
    cfg.delta_max = 0.5 + 7.5 * rng.uniform01();
    cfg.gamma = rng.bernoulli(0.1) ? 0.0 : 0.05 + 3.95 * rng.uniform01();
    const double d1 = -10.0 + 20.0 * rng.uniform01();
    const double d2 = -10.0 + 20.0 * rng.uniform01();
    const double a1 = intensity_weight(d1, cfg), a2 = intensity_weight(d2, cfg);
    range += !(a1 >= 0.0 && a1 <= 1.0);
    monotone += (d1 <= d2 && a1 > a2) || (d2 <= d1 && a2 > a1);
    low += d1 <= 0.0 && a1 != 0.0;
    if (cfg.gamma > 0.0) high += d1 >= cfg.delta_max && a1 != 1.0;
  }
  const bool ok = range == 0 && monotone == 0 && low == 0 && high == 0;
  std::ostringstream os;
  os << samples << " samples: " << range << " out of range, " << monotone << " order violations, " << low
     << " nonzero at delta<=0, " << high << " below 1 at delta>=delta_max";
  return {"weight function", ok, os.str(), 6};
}

std::vector<AcceptanceCheck> property_checks() {
  return {gradient_fidelity(), gate_nullification(), reduction_identity(), alignment_oracle(),
          weight_function()};
}

}  // namespace tipo::acceptance
