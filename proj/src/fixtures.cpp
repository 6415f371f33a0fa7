#include "tipo/fixtures.hpp"

namespace tipo::fixtures {
namespace {

const std::vector<ActionType>& small_alphabet() {
  using enum ActionType;
  static const std::vector<ActionType> a{tap, scroll, search, deny_permission, grant_permission,
                                         clear_traces, accept_tracking};
  return a;
}

}  // namespace

Trajectory random_trajectory(Rng& rng, int len, Persona persona,
                             const std::vector<ActionType>& actions, int n_targets) {
  Trajectory t{"task_rand", persona, {}};
  for (int i = 0; i < len; ++i) {
    Step s;
    s.index = i;
    s.action = actions[rng.index(actions.size())];
    s.args["target"] = std::string(1, static_cast<char>('a' + rng.index(n_targets)));
    s.args["x"] = std::to_string(rng.uniform_int(0, 999));
    s.desc = describe(s.action, s.args);
    t.steps.push_back(std::move(s));
  }
  return t;
}

PreferencePair random_pair(Rng& rng, int max_len) {
  const auto persona = kPersonas[rng.index(2)];
  const int n = rng.uniform_int(1, max_len), m = rng.uniform_int(1, max_len);
  return PreferencePair{"task_rand", persona, random_trajectory(rng, n, persona, small_alphabet()),
                        random_trajectory(rng, m, opposite(persona), small_alphabet())};
}

PolicyParams random_params(Rng& rng, double scale, const FeatureTemplate& tmpl) {
  PolicyParams p(tmpl);
  for (auto& w : p.weights()) w = scale * rng.normal();
  return p;
}

StepContext random_context(Rng& rng, const FeatureTemplate& tmpl) {
  StepContext c;
  c.persona = kPersonas[rng.index(2)];
  c.task_category = kTaskCategories[rng.index(kTaskCategories.size())];
  c.goal_id = static_cast<int>(rng.index(tmpl.goal_buckets));
  c.step_bucket = static_cast<int>(rng.index(tmpl.step_buckets));
  c.prev_action = static_cast<int>(rng.index(kPrevActionSlots));
  if (c.prev_action == action_id(ActionType::no_action)) c.prev_action = kStartMarker;
  return c;
}

Batch generated_batch(int n_tasks, std::uint64_t seed, const FeatureTemplate& tmpl) {
  GenConfig g;
  g.n_tasks = n_tasks;
  g.seed = seed;
  Batch b;
  b.dataset = generate(g);
  for (std::size_t i = 0; i < b.dataset.tasks.size(); ++i) {
    const auto info = task_info(b.dataset.tasks[i], tmpl);
    for (auto p : kPersonas) {
      b.sft.push_back(prepare_sft(b.dataset.pairs[i].of(p), info, tmpl));
      b.pairs.push_back(prepare_pair(make_preference_pair(b.dataset.pairs[i], p), info, tmpl));
    }
  }
  return b;
}

std::vector<PreparedPair> random_prepared(Rng& rng, int n_pairs, int max_len,
                                          const FeatureTemplate& tmpl) {
  std::vector<PreparedPair> out;
  for (int i = 0; i < n_pairs; ++i) {
    const TaskInfo info{kTaskCategories[rng.index(kTaskCategories.size())],
                        static_cast<int>(rng.index(tmpl.goal_buckets))};
    out.push_back(prepare_pair(random_pair(rng, max_len), info, tmpl));
  }
  return out;
}

}  // namespace tipo::fixtures
