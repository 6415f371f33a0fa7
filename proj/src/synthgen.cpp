#include "tipo/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "tipo/error.hpp"
#include "tipo/rng.hpp"

namespace tipo {
namespace {

using enum ActionType;

struct DecisionKind {
  ActionType protective;
  ActionType exposing;
};

// Decision slots sit before a fixed backbone position. Slot 0 always fires
// and opposes a Protective action to an Exposing one; later slots are optional
// per task and only fire when the backbone is long enough to reach them.
struct DecisionSlot {
  int position;
  DecisionKind kind;
};

struct GoalTemplate {
  const char* goal;
  const char* app;
  const char* query;
  const char* tap_target;
  const char* text;
  std::array<ActionType, 6> skeleton;  // neutral steps after open_app
  std::vector<DecisionSlot> slots;
  std::vector<ActionType> epilogue;  // Privacy-first defensive steps, when drawn
};

constexpr DecisionKind kIncognito{enable_incognito, accept_tracking};
constexpr DecisionKind kCookies{decline_tracking, accept_tracking};
constexpr DecisionKind kPolicy{read_policy, tap};
constexpr DecisionKind kStorage{save_local, save_cloud};
constexpr DecisionKind kSession{logout, stay_logged_in};
constexpr DecisionKind kPermission{deny_permission, grant_permission};
constexpr DecisionKind kAutofill{type_text, use_stored_info};

// clang-format off
const std::vector<GoalTemplate>& browsing_templates() {
  static const std::vector<GoalTemplate> t{
      {"Open a link in the browser", "Chrome", "news link", "Open link", "", {search, tap, scroll, tap, back, scroll},
       {{1, kIncognito}, {4, kPolicy}, {6, kCookies}}, {clear_traces}},
      {"Search for a recipe online", "Chrome", "pasta recipe", "First result", "", {search, tap, scroll, scroll, back, tap},
       {{2, kCookies}, {5, kPolicy}}, {clear_traces}},
      {"Watch a video in the app", "YouTube", "cooking video", "Play", "", {search, tap, scroll, tap, back, search},
       {{3, kCookies}, {1, kPolicy}, {6, kIncognito}}, {logout, clear_traces}},
      {"Read a news article", "NewsHub", "headline", "Top story", "", {tap, scroll, scroll, back, tap, scroll},
       {{1, kCookies}, {3, kPolicy}}, {clear_traces}},
      {"Browse a social feed", "Weibo", "trending", "Post", "", {scroll, tap, scroll, back, scroll, tap},
       {{2, kIncognito}, {5, kCookies}}, {logout}},
  };
  return t;
}

const std::vector<GoalTemplate>& account_templates() {
  static const std::vector<GoalTemplate> t{
      {"Back up photos now", "Gallery", "album", "Select all", "", {tap, scroll, tap, search, tap, scroll},
       {{3, kStorage}, {1, kPermission}, {6, kSession}}, {logout}},
      {"Sign in to an email account", "Mail", "inbox", "Sign in", "", {tap, tap, scroll, search, tap, scroll},
       {{2, kSession}, {5, kPermission}}, {logout, clear_traces}},
      {"Share a document with a colleague now", "Docs", "report", "Share", "", {search, tap, scroll, tap, tap, scroll},
       {{1, kPermission}, {4, kStorage}}, {clear_traces}},
      {"Download a file for later", "Files", "invoice pdf", "Download", "", {search, tap, tap, scroll, tap, scroll},
       {{3, kStorage}, {5, kSession}}, {logout}},
      {"Set up a cloud drive now", "Drive", "storage", "Get started", "", {tap, scroll, tap, tap, search, scroll},
       {{2, kSession}, {4, kStorage}, {6, kPermission}}, {logout, clear_traces}},
  };
  return t;
}

const std::vector<GoalTemplate>& transactional_templates() {
  static const std::vector<GoalTemplate> t{
      {"Buy a phone case today", "JD", "phone case", "Add to cart", "Shipping address", {search, tap, scroll, tap, type_text, scroll},
       {{3, kPermission}, {5, kAutofill}}, {logout}},
      {"Order food delivery", "Meituan", "noodles", "Add item", "Delivery note", {search, tap, tap, type_text, scroll, tap},
       {{1, kPermission}, {4, kAutofill}}, {clear_traces}},
      {"Book a train ticket today", "Trip", "Beijing to Shanghai", "Select seat", "Passenger name", {type_text, search, tap, scroll, tap, type_text},
       {{2, kPermission}, {6, kAutofill}}, {logout, clear_traces}},
      {"Pay a utility bill now", "Alipay", "electricity", "Pay now", "Account number", {search, tap, type_text, tap, scroll, tap},
       {{3, kPermission}, {5, kAutofill}}, {logout}},
      {"Reserve a hotel room now", "Booking", "hotel downtown", "Reserve", "Guest name", {search, scroll, tap, type_text, tap, scroll},
       {{1, kPermission}, {4, kAutofill}}, {clear_traces}},
  };
  return t;
}
// clang-format on

const std::vector<GoalTemplate>& templates_for(TaskCategory c) {
  switch (c) {
    case TaskCategory::BrowsingInteraction: return browsing_templates();
    case TaskCategory::AccountFile: return account_templates();
    case TaskCategory::Transactional: return transactional_templates();
  }
  return browsing_templates();
}

const char* decision_target(ActionType a) {
  switch (a) {
    case read_policy: return "Privacy policy";
    case grant_permission: return "Allow location";
    case deny_permission: return "Deny location";
    case enable_incognito: return "Incognito mode";
    case accept_tracking: return "Accept all cookies";
    case decline_tracking: return "Reject cookies";
    case stay_logged_in: return "Keep me signed in";
    case logout: return "Log out";
    case clear_traces: return "Clear history";
    case save_local: return "Save to device";
    case save_cloud: return "Save to cloud";
    case use_stored_info: return "Autofill saved details";
    default: return nullptr;
  }
}

Args with_coords(Args a, Rng& rng) {
  a["x"] = std::to_string(rng.uniform_int(20, 1060));
  a["y"] = std::to_string(rng.uniform_int(80, 2300));
  return a;
}

std::map<ActionType, Args> make_bindings(const GoalTemplate& g, Rng& rng) {
  std::map<ActionType, Args> b;
  b[open_app] = {{"name", g.app}};
  b[search] = {{"query", g.query}};
  b[tap] = with_coords({{"target", g.tap_target}}, rng);
  b[type_text] = {{"text", *g.text ? g.text : g.query}};
  b[scroll] = {{"direction", "down"}};
  b[back] = {};
  b[confirm] = with_coords({{"target", "Confirm"}}, rng);
  for (int id = 0; id < kNumActions; ++id) {
    const auto a = static_cast<ActionType>(id);
    if (const char* target = decision_target(a)) b[a] = with_coords({{"target", target}}, rng);
  }
  return b;
}

Trajectory build_branch(const TaskInstance& task, Persona persona,
                        const std::vector<ActionType>& backbone,
                        const std::vector<ActionType>& epilogue) {
  std::vector<ActionType> actions;
  auto decision_at = [&](int pos) -> const DecisionPoint* {
    for (const auto& dp : task.decision_points)
      if (dp.position == pos) return &dp;
    return nullptr;
  };
  auto emit_decision = [&](int pos) {
    if (const auto* dp = decision_at(pos))
      actions.push_back(persona == Persona::PrivacyFirst ? dp->protective_action : dp->exposing_action);
  };
  for (int i = 0; i < static_cast<int>(backbone.size()); ++i) {
    emit_decision(i);
    actions.push_back(backbone[i]);
  }
  emit_decision(static_cast<int>(backbone.size()));
  if (persona == Persona::PrivacyFirst)
    actions.insert(actions.end(), epilogue.begin(), epilogue.end());
  actions.push_back(confirm);

  Trajectory t{task.task_id, persona, {}};
  for (std::size_t i = 0; i < actions.size(); ++i)
    t.steps.push_back(ground_step(task, actions[i], static_cast<int>(i)));
  return t;
}

std::string task_id_for(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "task_%04d", index);
  return buf;
}

}  // namespace

void GenConfig::validate() const {
  if (n_tasks < 1) throw ConfigError("gen.n_tasks must be positive");
  double mix = 0.0;
  for (double w : category_mix) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("gen.category_mix weights must be >= 0");
    mix += w;
  }
  if (!(mix > 0.0)) throw ConfigError("gen.category_mix must have a positive weight");
  if (backbone_len_range[0] < 2 || backbone_len_range[1] < backbone_len_range[0] ||
      backbone_len_range[1] > 7)
    throw ConfigError("gen.backbone_len_range must satisfy 2 <= min <= max <= 7");
  if (decision_points_range[0] < 1 || decision_points_range[1] < decision_points_range[0] ||
      decision_points_range[1] > backbone_len_range[0])
    throw ConfigError("gen.decision_points_range must satisfy 1 <= min <= max <= backbone min");
  if (!(epilogue_prob >= 0.0 && epilogue_prob <= 1.0))
    throw ConfigError("gen.epilogue_prob must lie in [0, 1]");
  double total = 0.0;
  for (double f : split) {
    if (!(f >= 0.0)) throw ConfigError("gen.split fractions must be >= 0");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("gen.split fractions must sum to 1");
}

std::pair<TaskInstance, TrajectoryPair> generate_task(const GenConfig& cfg, int task_index) {
  Rng rng(hash_seed(cfg.seed, static_cast<std::uint64_t>(task_index) + 1));

  TaskInstance task;
  task.task_id = task_id_for(task_index);
  task.category = kTaskCategories[rng.weighted(cfg.category_mix)];
  const auto& pool = templates_for(task.category);
  const auto& tmpl = pool[rng.index(pool.size())];
  task.goal = tmpl.goal;
  task.backbone_len = rng.uniform_int(cfg.backbone_len_range[0], cfg.backbone_len_range[1]);
  task.bindings = make_bindings(tmpl, rng);

  std::vector<ActionType> backbone{open_app};
  for (int i = 1; i < task.backbone_len; ++i) backbone.push_back(tmpl.skeleton[i - 1]);

  // Slot 0 always fires; optional slots reachable within this backbone are
  // drawn at random up to the sampled decision count.
  std::vector<DecisionSlot> optional;
  for (std::size_t i = 1; i < tmpl.slots.size(); ++i)
    if (tmpl.slots[i].position <= task.backbone_len) optional.push_back(tmpl.slots[i]);
  rng.shuffle(optional);
  const int n_dp = rng.uniform_int(cfg.decision_points_range[0], cfg.decision_points_range[1]);
  std::vector<DecisionSlot> active{tmpl.slots.front()};
  active.front().position = std::min(active.front().position, task.backbone_len);
  for (int i = 1; i < n_dp && i - 1 < static_cast<int>(optional.size()); ++i) active.push_back(optional[i - 1]);
  std::sort(active.begin(), active.end(),
            [](const DecisionSlot& x, const DecisionSlot& y) { return x.position < y.position; });
  for (const auto& s : active)
    task.decision_points.push_back({s.position, s.kind.protective, s.kind.exposing, false});

  std::vector<ActionType> epilogue;
  if (rng.bernoulli(cfg.epilogue_prob)) {
    epilogue = tmpl.epilogue;
    task.decision_points.back().adds_epilogue = true;
  }

  TrajectoryPair pair{build_branch(task, Persona::PrivacyFirst, backbone, epilogue),
                      build_branch(task, Persona::UtilityFirst, backbone, epilogue)};
  return {std::move(task), std::move(pair)};
}

Dataset generate(const GenConfig& cfg) {
  cfg.validate();
  Dataset ds;
  ds.tasks.reserve(cfg.n_tasks);
  ds.pairs.reserve(cfg.n_tasks);
  for (int i = 0; i < cfg.n_tasks; ++i) {
    auto [task, pair] = generate_task(cfg, i);
    ds.tasks.push_back(std::move(task));
    ds.pairs.push_back(std::move(pair));
  }

  std::vector<int> order(cfg.n_tasks);
  for (int i = 0; i < cfg.n_tasks; ++i) order[i] = i;
  Rng split_rng(hash_seed(cfg.seed, 0));
  split_rng.shuffle(order);
  const int n_train = static_cast<int>(std::lround(cfg.n_tasks * cfg.split[0]));
  const int n_val = std::min(cfg.n_tasks - n_train,
                             static_cast<int>(std::lround(cfg.n_tasks * cfg.split[1])));
  for (int k = 0; k < cfg.n_tasks; ++k) {
    auto& bucket = k < n_train ? ds.splits.train
                   : k < n_train + n_val ? ds.splits.val
                                         : ds.splits.test;
    bucket.push_back(ds.tasks[order[k]].task_id);
  }
  for (auto* v : {&ds.splits.train, &ds.splits.val, &ds.splits.test}) std::sort(v->begin(), v->end());
  return ds;
}

PreferencePair make_preference_pair(const TrajectoryPair& pair, Persona p) {
  return PreferencePair{pair.privacy_first.task_id, p, pair.of(p), pair.of(opposite(p))};
}

std::vector<PreferencePair> build_preference_pairs(const std::vector<TrajectoryPair>& pairs) {
  std::vector<PreferencePair> out;
  out.reserve(pairs.size() * 2);
  for (const auto& tp : pairs) {
    if (tp.privacy_first.task_id != tp.utility_first.task_id)
      throw DataError("unpaired task: " + tp.privacy_first.task_id + " / " + tp.utility_first.task_id);
    for (auto p : kPersonas) out.push_back(make_preference_pair(tp, p));
  }
  return out;
}

std::vector<PreferencePair> build_preference_pairs(const std::vector<TrajectoryPair>& pairs,
                                                   Persona persona) {
  std::vector<PreferencePair> out;
  for (auto& pp : build_preference_pairs(pairs))
    if (pp.persona == persona) out.push_back(std::move(pp));
  return out;
}

std::vector<TrajectoryPair> pair_trajectories(const std::vector<Trajectory>& trajectories) {
  std::map<std::string, std::array<const Trajectory*, 2>> by_task;
  std::vector<std::string> order;
  for (const auto& t : trajectories) {
    auto [it, inserted] = by_task.try_emplace(t.task_id, std::array<const Trajectory*, 2>{});
    if (inserted) order.push_back(t.task_id);
    auto& slot = it->second[static_cast<int>(t.persona)];
    if (slot) throw DataError("duplicate " + std::string(persona_name(t.persona)) +
                              " trajectory for " + t.task_id);
    slot = &t;
  }
  std::vector<TrajectoryPair> out;
  for (const auto& id : order) {
    const auto& slots = by_task[id];
    if (!slots[0] || !slots[1]) throw DataError("unpaired task: " + id);
    out.push_back({*slots[0], *slots[1]});
  }
  return out;
}

std::vector<std::string> split_leaks(const Splits& s, const std::vector<TaskInstance>& tasks) {
  std::map<std::string, int> seen;
  for (const auto* v : {&s.train, &s.val, &s.test})
    for (const auto& id : *v) ++seen[id];
  std::vector<std::string> out;
  for (const auto& [id, n] : seen)
    if (n != 1) out.push_back(id);
  for (const auto& t : tasks)
    if (!seen.count(t.task_id)) out.push_back(t.task_id);
  return out;
}

}  // namespace tipo
