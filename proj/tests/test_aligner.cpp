#include "doctest.h"
#include "helpers.hpp"
#include "tipo/acceptance.hpp"
#include "tipo/aligner.hpp"
#include "tipo/error.hpp"
#include "tipo/fixtures.hpp"

using namespace tipo;
using enum ActionType;
using testing::step;
using testing::traj;

namespace {

PreferencePair pair_of(Trajectory chosen, Trajectory rejected) {
  chosen.persona = Persona::PrivacyFirst;
  rejected.persona = Persona::UtilityFirst;
  return PreferencePair{chosen.task_id, Persona::PrivacyFirst, chosen, rejected};
}

}  // namespace

TEST_CASE("match_key") {
  CHECK(match_key(step(0, tap, {{"x", "129"}, {"y", "138"}, {"target", "Search"}})) == "tap|target=search");
  CHECK(match_key(step(0, open_app, {{"name", "JD"}})) == "open_app|name=jd");
  CHECK(match_key(placeholder_step(3)) == "no_action|");
  CHECK(match_key(step(0, type_text, {{"text", "  Guest   Name "}})) == "type_text|text=guest name");
  CHECK(match_key(step(0, tap, {{"target", "b"}, {"a", "1"}})) == "tap|a=1;target=b");
}

TEST_CASE("variable-length alignment") {
  const auto p = pair_of(traj({open_app, enable_incognito, search, clear_traces}), traj({open_app, search}));
  const auto ap = align_pair(p);
  REQUIRE(ap.size() == 4);
  const std::vector<std::pair<ActionType, ActionType>> expected{
      {open_app, open_app}, {enable_incognito, no_action}, {search, search}, {clear_traces, no_action}};
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(ap.columns[t].t == static_cast<int>(t));
    CHECK(ap.columns[t].chosen.action == expected[t].first);
    CHECK(ap.columns[t].rejected.action == expected[t].second);
  }
  CHECK(matched_columns(ap) == 2);
  CHECK(validate_aligned(ap).empty());
}

TEST_CASE("identical branches align without placeholders") {
  const auto y = traj({open_app, search, tap, scroll, confirm});
  const auto ap = align_pair(pair_of(y, y));
  CHECK(placeholder_count(ap) == 0);
  CHECK(matched_columns(ap) == 5);
}

TEST_CASE("three against one: every insertion pattern enumerated") {
  // y+ = [a, b, c], y- = [c]; gaps in y- at one of {0,1}, {0,2}, {1,2}.
  const auto p = pair_of(traj({tap, scroll, search}), traj({search}));
  int best = -1;
  std::vector<int> best_gaps;
  for (int keep = 0; keep < 3; ++keep) {  // column holding y-'s only step
    const int matched = keep == 2;
    std::vector<int> gaps;
    for (int t = 0; t < 3; ++t)
      if (t != keep) gaps.push_back(t);
    if (matched > best || (matched == best && gaps < best_gaps)) {
      best = matched;
      best_gaps = gaps;
    }
  }
  const auto ap = align_pair(p);
  CHECK(static_cast<int>(matched_columns(ap)) == best);
  CHECK(best_gaps == std::vector<int>{0, 1});
  CHECK(ap.columns[0].rejected.is_placeholder());
  CHECK(ap.columns[1].rejected.is_placeholder());
  CHECK(ap.columns[2].rejected.action == search);
}

TEST_CASE("ties go to the earliest placeholder positions") {
  // Nothing matches, so every placement ties.
  const auto ap = align_pair(pair_of(traj({tap, tap, tap}), traj({scroll})));
  CHECK(ap.columns[0].rejected.is_placeholder());
  CHECK(ap.columns[1].rejected.is_placeholder());
  CHECK(ap.columns[2].rejected.action == scroll);
}

TEST_CASE("placeholders go into whichever branch is shorter") {
  const auto ap = align_pair(pair_of(traj({open_app}), traj({open_app, logout, confirm})));
  CHECK(ap.size() == 3);
  for (const auto& c : ap.columns) CHECK_FALSE(c.rejected.is_placeholder());
  CHECK(placeholder_count(ap) == 2);
}

TEST_CASE("empty branch is rejected") {
  auto p = pair_of(traj({open_app}), traj({open_app}));
  p.rejected.steps.clear();
  CHECK_THROWS_AS(align_pair(p), PreconditionError);
}

TEST_CASE("alignment is deterministic and round-trips") {
  Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    const auto p = fixtures::random_pair(rng, 9);
    const auto a = align_pair(p), b = align_pair(p);
    CHECK(a == b);
    CHECK(strip_chosen(a) == p.chosen);
    CHECK(strip_rejected(a) == p.rejected);
    CHECK(validate_aligned(a).empty());
  }
}

TEST_CASE("dynamic program against exhaustive enumeration") {
  const auto c = acceptance::alignment_oracle();
  INFO(c.detail);
  CHECK(c.passed);
}
