#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "tipo/acceptance.hpp"
#include "tipo/intensity.hpp"
#include "tipo/rng.hpp"

using namespace tipo;
using enum ActionType;
using testing::step;

namespace {

AlignedColumn col(ActionType chosen, ActionType rejected) {
  return AlignedColumn{0, chosen == no_action ? placeholder_step(0) : step(0, chosen),
                       rejected == no_action ? placeholder_step(0) : step(0, rejected)};
}

}  // namespace

TEST_CASE("score table") {
  const ScoreConfig cfg;
  CHECK(score_action(step(0, deny_permission), Persona::PrivacyFirst, cfg) == 2);
  CHECK(score_action(step(0, deny_permission), Persona::UtilityFirst, cfg) == -2);
  CHECK(score_action(placeholder_step(0), Persona::PrivacyFirst, cfg) == 0);
  CHECK(score_action(step(0, tap), Persona::UtilityFirst, cfg) == 0);
  CHECK(score_action(step(0, accept_tracking), Persona::UtilityFirst, cfg) == 2);
}

TEST_CASE("scores are antisymmetric across personas on non-neutral actions") {
  const ScoreConfig cfg;
  for (int id = 0; id < kNumActions; ++id) {
    const auto s = step(0, action_from_id(id));
    if (s.category() == PrivacyCategory::Neutral) continue;
    CHECK(score_action(s, Persona::PrivacyFirst, cfg) == -score_action(s, Persona::UtilityFirst, cfg));
  }
}

TEST_CASE("delta score") {
  const ScoreConfig cfg;
  CHECK(delta_score(col(deny_permission, grant_permission), Persona::PrivacyFirst, cfg) == 4);
  CHECK(delta_score(col(tap, tap), Persona::PrivacyFirst, cfg) == 0);
  CHECK(delta_score(col(search, accept_tracking), Persona::PrivacyFirst, cfg) == 2);
}

TEST_CASE("intensity weight") {
  ScoreConfig cfg;
  CHECK(intensity_weight(4, cfg) == 1.0);
  CHECK(intensity_weight(-2, cfg) == 0.0);
  cfg.gamma = 2.0;
  CHECK(intensity_weight(2, cfg) == doctest::Approx(0.25).epsilon(1e-15));
  cfg.gamma = 0.5;
  CHECK(intensity_weight(-2, cfg) == 0.0);
}

TEST_CASE("gamma = 0 turns the weight into an indicator") {
  ScoreConfig cfg;
  cfg.gamma = 0.0;
  for (double d : {-3.0, -0.5, 0.0}) CHECK(intensity_weight(d, cfg) == 0.0);
  for (double d : {1e-9, 0.5, 2.0, 4.0, 100.0}) CHECK(intensity_weight(d, cfg) == 1.0);
}

TEST_CASE("padding gate tests the chosen side only") {
  CHECK(padding_gate(col(no_action, tap)) == 0);
  CHECK(padding_gate(col(tap, no_action)) == 1);
  CHECK(padding_gate(col(tap, scroll)) == 1);
}

TEST_CASE("weight function properties") {
  const auto c = acceptance::weight_function();
  INFO(c.detail);
  CHECK(c.passed);
}

TEST_CASE("score config validation") {
  ScoreConfig cfg;
  cfg.delta_max = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.gamma = -1.0;
  CHECK_THROWS(cfg.validate());
}
