#include <cmath>
#include <cstring>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "tipo/aligner.hpp"
#include "tipo/error.hpp"
#include "tipo/fixtures.hpp"
#include "tipo/jsonl.hpp"

using namespace tipo;
using enum ActionType;

// log(1/19) to 18 digits (mpmath, 30-digit precision).
constexpr double kLogUniform = -2.94443897916644046;

TEST_CASE("feature layout") {
  const FeatureTemplate tmpl;
  CHECK(tmpl.dim() == 96);
  StepContext c{Persona::PrivacyFirst, TaskCategory::AccountFile, 5, 3, action_id(tap)};
  CHECK(featurize(c, tmpl) == featurize(c, tmpl));

  auto other = c;
  other.persona = Persona::UtilityFirst;
  const auto a = featurize(c, tmpl).active, b = featurize(other, tmpl).active;
  for (int blk = 0; blk < kFeatureBlocks; ++blk) {
    const bool persona_or_cross = blk == 0 || blk == kFeatureBlocks - 1;
    CHECK((a[blk] != b[blk]) == persona_or_cross);
  }

  c.goal_id = tmpl.goal_buckets;
  CHECK_THROWS_AS(featurize(c, tmpl), PreconditionError);
}

TEST_CASE("zero weights give the uniform policy over 19 heads") {
  const PolicyParams w;
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto c = fixtures::random_context(rng);
    for (int a = 0; a < kNumPolicyActions; ++a)
      CHECK(log_prob(w, c, action_from_id(a)) == doctest::Approx(kLogUniform).epsilon(1e-14));
  }
}

TEST_CASE("normalization and masking") {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const auto w = fixtures::random_params(rng, 2.0);
    const auto c = fixtures::random_context(rng);
    double total = 0.0;
    for (int a = 0; a < kNumPolicyActions; ++a) total += std::exp(log_prob(w, c, action_from_id(a)));
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(action_probs(w, c)[action_id(no_action)] == 0.0);
    CHECK_THROWS_AS(log_prob(w, c, no_action), MaskedActionError);
  }
}

TEST_CASE("a dominant logit") {
  // Exact value: -log(1 + 18 e^-1000), which is 0 in double precision; the
  // other heads sit at -1000 - log(1 + 18 e^-1000) = -1000.
  PolicyParams w;
  const StepContext c;
  w.at(featurize(c, w.feature_template()).active[0], action_id(search)) = 1000.0;
  CHECK(log_prob(w, c, search) == 0.0);
  CHECK(log_prob(w, c, tap) == -1000.0);
  CHECK(std::isfinite(log_prob(w, c, tap)));
}

TEST_CASE("trajectory log-probability") {
  const PolicyParams w;
  const TaskInfo info;
  const auto y = testing::traj({open_app, search, tap, confirm});
  CHECK(traj_log_prob(w, info, Persona::PrivacyFirst, y) ==
        doctest::Approx(-11.7777559166657618).epsilon(1e-14));
  CHECK_THROWS_AS(traj_log_prob(w, info, Persona::PrivacyFirst, Trajectory{}), PreconditionError);

  Rng rng(5);
  const std::vector<ActionType> alphabet{open_app, tap, search, deny_permission, confirm};
  for (int i = 0; i < 100; ++i) {
    const auto p = fixtures::random_params(rng, 1.5);
    const auto t = fixtures::random_trajectory(rng, rng.uniform_int(1, 10), Persona::UtilityFirst, alphabet);
    CHECK(traj_log_prob(p, info, Persona::UtilityFirst, t) <= 0.0);
  }
}

TEST_CASE("gradient structure") {
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto w = fixtures::random_params(rng, 1.0);
    const auto c = fixtures::random_context(rng);
    const auto a = action_from_id(static_cast<int>(rng.index(kNumPolicyActions)));
    const auto g = grad_log_prob(w, c, a);
    const auto active = featurize(c, w.feature_template()).active;
    for (int row = 0; row < w.rows(); ++row) {
      double sum = 0.0;
      for (int k = 0; k < kNumActions; ++k) sum += g[row * kNumActions + k];
      const bool is_active = std::find(active.begin(), active.end(), row) != active.end();
      if (is_active) {
        CHECK(std::abs(sum) <= 1e-12);
      } else {
        for (int k = 0; k < kNumActions; ++k) CHECK(g[row * kNumActions + k] == 0.0);
      }
    }
  }
}

TEST_CASE("grad_log_prob against central differences") {
  Rng rng(7);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto w = fixtures::random_params(rng, 1.0);
    const auto c = fixtures::random_context(rng);
    const auto a = action_from_id(static_cast<int>(rng.index(kNumPolicyActions)));
    const auto g = grad_log_prob(w, c, a);
    const auto active = featurize(c, w.feature_template()).active;
    const int row = active[rng.index(active.size())];
    const int k = static_cast<int>(rng.index(kNumActions));
    auto plus = w, minus = w;
    plus.at(row, k) += eps;
    minus.at(row, k) -= eps;
    const double numeric = (log_prob(plus, c, a) - log_prob(minus, c, a)) / (2 * eps);
    const double analytic = g[row * kNumActions + k];
    worst = std::max(worst, std::abs(analytic - numeric) /
                                std::max({std::abs(analytic), std::abs(numeric), 1e-4}));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("placeholder columns keep the branch context") {
  GenConfig g;
  g.n_tasks = 20;
  const auto ds = generate(g);
  Rng rng(8);
  const auto w = fixtures::random_params(rng, 1.0);
  for (std::size_t i = 0; i < ds.tasks.size(); ++i) {
    const auto info = task_info(ds.tasks[i], w.feature_template());
    const auto ap = align_pair(make_preference_pair(ds.pairs[i], Persona::PrivacyFirst));
    std::vector<Step> rej;
    for (const auto& c : ap.columns) rej.push_back(c.rejected);
    const auto ctx = branch_contexts(info, Persona::PrivacyFirst, rej, w.feature_template());
    double sum = 0.0;
    for (std::size_t t = 0; t < rej.size(); ++t)
      if (!rej[t].is_placeholder()) sum += log_prob(w, ctx[t], rej[t].action);
    const double direct = traj_log_prob(w, info, Persona::PrivacyFirst, ds.pairs[i].utility_first);
    CHECK(sum == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("frozen reference survives training steps on the clone") {
  Rng rng(9);
  auto w = fixtures::random_params(rng, 0.5);
  const auto ref = clone_frozen(w);
  const auto before = checksum(ref.params());
  std::vector<std::byte> bytes(ref.params().size() * sizeof(double));
  std::memcpy(bytes.data(), ref.params().weights().data(), bytes.size());
  for (int s = 0; s < 100; ++s) {
    const auto c = fixtures::random_context(rng);
    const auto g = grad_log_prob(w, c, tap);
    for (std::size_t i = 0; i < g.size(); ++i) w.weights()[i] += 0.1 * g[i];
  }
  CHECK(checksum(ref.params()) == before);
  CHECK(std::memcmp(bytes.data(), ref.params().weights().data(), bytes.size()) == 0);
  CHECK(checksum(w) != before);
}

TEST_CASE("checkpoint round trip and header checks") {
  Rng rng(10);
  const auto w = fixtures::random_params(rng, 1.0);
  const auto dir = testing::scratch("ckpt");
  save_checkpoint(dir / "w.json", w);
  CHECK(load_checkpoint(dir / "w.json") == w);

  auto j = read_json_file(dir / "w.json");
  j["header"]["feature_template_version"] = FeatureTemplate::kVersion + 1;
  std::ofstream(dir / "bad.json") << j.dump();
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.json"), SchemaError);

  j = read_json_file(dir / "w.json");
  j["weights"].erase(0);
  std::ofstream(dir / "short.json") << j.dump();
  CHECK_THROWS_AS(load_checkpoint(dir / "short.json"), SchemaError);
}
