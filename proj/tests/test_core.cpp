#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "tipo/error.hpp"
#include "tipo/fixtures.hpp"
#include "tipo/jsonl.hpp"
#include "tipo/synthgen.hpp"

using namespace tipo;
using enum ActionType;
using testing::traj;

TEST_CASE("privacy category table covers the vocabulary") {
  int protective = 0, exposing = 0, neutral = 0;
  for (int id = 0; id < kNumActions; ++id) {
    const auto a = action_from_id(id);
    CHECK(parse_action(action_name(a)) == a);
    switch (category_of(a)) {
      case PrivacyCategory::Protective: ++protective; break;
      case PrivacyCategory::Exposing: ++exposing; break;
      case PrivacyCategory::Neutral: ++neutral; break;
    }
  }
  CHECK(protective == 7);
  CHECK(exposing == 5);
  CHECK(neutral == 8);
  CHECK(category_of(no_action) == PrivacyCategory::Neutral);
  CHECK_FALSE(parse_action("fly"));
}

TEST_CASE("validate_trajectory") {
  CHECK(validate_trajectory(traj({open_app, search, tap, confirm})).empty());

  auto with_gap = traj({open_app, tap, no_action, confirm});
  CHECK(validate_trajectory(with_gap) == std::vector<std::string>{"no_action in raw trajectory at index 2"});

  auto skipped = traj({open_app, tap, confirm});
  skipped.steps[1].index = 2;
  skipped.steps[2].index = 3;
  const auto v = validate_trajectory(skipped);
  REQUIRE(!v.empty());
  CHECK(v.front() == "non-contiguous index at position 1");

  CHECK(validate_trajectory(Trajectory{"t", Persona::PrivacyFirst, {}}) ==
        std::vector<std::string>{"empty trajectory"});
}

TEST_CASE("decision pairs") {
  CHECK(valid_decision_pair(deny_permission, grant_permission));
  CHECK(valid_decision_pair(read_policy, tap));
  CHECK(valid_decision_pair(type_text, use_stored_info));
  CHECK_FALSE(valid_decision_pair(grant_permission, deny_permission));
  CHECK_FALSE(valid_decision_pair(tap, scroll));
  CHECK_FALSE(valid_decision_pair(no_action, grant_permission));
}

TEST_CASE("jsonl round trip of generated data") {
  GenConfig g;
  g.n_tasks = 151;
  const auto ds = generate(g);
  std::vector<Trajectory> ts;
  for (const auto& p : ds.pairs) {
    ts.push_back(p.privacy_first);
    ts.push_back(p.utility_first);
  }
  REQUIRE(ts.size() == 302);
  const auto dir = testing::scratch("roundtrip");
  write_jsonl(dir / "t.jsonl", ts);
  CHECK(read_trajectories(dir / "t.jsonl") == ts);

  const auto pairs = build_preference_pairs(ds.pairs);
  write_jsonl(dir / "p.jsonl", pairs);
  CHECK(read_pairs(dir / "p.jsonl") == pairs);

  write_jsonl(dir / "tasks.jsonl", ds.tasks);
  CHECK(read_tasks(dir / "tasks.jsonl") == ds.tasks);

  std::vector<AlignedPair> aligned;
  for (const auto& p : pairs) aligned.push_back(align_pair(p));
  write_jsonl(dir / "a.jsonl", aligned);
  CHECK(read_aligned_pairs(dir / "a.jsonl") == aligned);

  const auto mixed = read_jsonl(dir / "p.jsonl");
  REQUIRE(mixed.size() == pairs.size());
  CHECK(std::holds_alternative<PreferencePair>(mixed.front()));
}

TEST_CASE("jsonl round trip of random trajectories") {
  Rng rng(11);
  std::vector<Trajectory> ts;
  std::vector<ActionType> all;
  for (int id = 0; id < kNumPolicyActions; ++id) all.push_back(action_from_id(id));
  for (int i = 0; i < 200; ++i) {
    auto t = fixtures::random_trajectory(rng, rng.uniform_int(1, 12), kPersonas[rng.index(2)], all, 5);
    t.steps[0].args["note"] = "quotes \" and \\ and unicode é";
    ts.push_back(t);
  }
  const auto dir = testing::scratch("random");
  write_jsonl(dir / "t.jsonl", ts);
  CHECK(read_trajectories(dir / "t.jsonl") == ts);
}

TEST_CASE("jsonl errors carry line numbers") {
  const auto dir = testing::scratch("errors");
  const auto good = to_json(traj({open_app, confirm})).dump();

  {
    std::ofstream(dir / "fly.jsonl") << good << "\n"
                                     << R"({"task_id":"t","persona":"privacy_first","steps":[{"index":0,"action":"fly","args":{},"desc":""}]})"
                                     << "\n";
  }
  try {
    read_trajectories(dir / "fly.jsonl");
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
  }

  { std::ofstream(dir / "broken.jsonl") << good << "\n\n{not json\n"; }
  try {
    read_trajectories(dir / "broken.jsonl");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }

  { std::ofstream(dir / "empty.jsonl"); }
  CHECK(read_trajectories(dir / "empty.jsonl").empty());
  CHECK_THROWS_AS(read_trajectories(dir / "missing.jsonl"), DataError);

  auto bad = traj({open_app, no_action});
  CHECK_THROWS_AS(write_jsonl(dir / "bad.jsonl", std::vector<Trajectory>{bad}), PreconditionError);
}

TEST_CASE("category is derived, not stored") {
  const auto j = to_json(traj({open_app, deny_permission}));
  for (const auto& s : j.at("steps")) CHECK_FALSE(s.contains("category"));
}

TEST_CASE("goal ids of distinct goals do not collide") {
  GenConfig g;
  g.n_tasks = 600;
  std::map<std::string, int> ids;
  for (const auto& t : generate(g).tasks) ids[t.goal] = goal_id(t.goal, FeatureTemplate{}.goal_buckets);
  std::set<int> distinct;
  for (const auto& [goal, id] : ids) distinct.insert(id);
  CHECK(ids.size() == 15);
  CHECK(distinct.size() == ids.size());
}
