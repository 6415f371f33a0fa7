#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "tipo/error.hpp"
#include "tipo/fixtures.hpp"
#include "tipo/pipeline.hpp"

using namespace tipo;

namespace {

const double kLog19 = std::log(19.0);

const TrainingData& data() {
  static const TrainingData d = prepare_training(generate(GenConfig{}), FeatureTemplate{});
  return d;
}

// Fraction of 5-epoch moving-average windows that do not increase.
double non_increasing_share(const std::vector<EpochLog>& log) {
  std::vector<double> loss;
  for (const auto& e : log)
    if (e.split == "train") loss.push_back(e.loss);
  std::vector<double> avg;
  for (std::size_t i = 0; i + 5 <= loss.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = i; k < i + 5; ++k) s += loss[k];
    avg.push_back(s / 5.0);
  }
  int ok = 0;
  for (std::size_t i = 1; i < avg.size(); ++i) ok += avg[i] <= avg[i - 1] + 1e-12;
  return avg.size() < 2 ? 1.0 : ok / static_cast<double>(avg.size() - 1);
}

}  // namespace

TEST_CASE("sft memorizes a single trajectory") {
  const auto batch = fixtures::generated_batch(1, 17);
  const std::vector<SftExample> one{batch.sft.front()};
  TrainConfig cfg;
  cfg.epochs_sft = 200;
  const auto r = train_sft(one, cfg);
  CHECK(r.log.back().loss < 0.1 * kLog19);
  CHECK(r.log.back().loss < r.log.front().loss);

  // The memorized policy decodes the reference exactly.
  const auto& task = batch.dataset.tasks.front();
  const auto& ref = one.front().trajectory;
  CHECK(generate_trajectory(r.params, task, ref.persona) == ref);
}

TEST_CASE("sft training reduces the loss and is deterministic") {
  TrainConfig cfg;
  const auto a = train_sft(data().sft, cfg);
  const auto b = train_sft(data().sft, cfg);
  CHECK(a.params == b.params);
  CHECK(a.log.front().loss == doctest::Approx(kLog19).epsilon(1e-12));
  CHECK(a.log.back().loss < a.log.front().loss);
  CHECK(non_increasing_share(a.log) >= 0.9);

  cfg.seed = 8;
  CHECK(train_sft(data().sft, cfg).params != a.params);
}

TEST_CASE("zero learning rate leaves parameters alone") {
  TrainConfig cfg;
  cfg.lr_sft = 0.0;
  cfg.lr_pref = 0.0;
  cfg.epochs_sft = 5;
  cfg.epochs_pref = 5;
  const auto sft = train_sft(data().sft, cfg);
  CHECK(sft.params == PolicyParams{});
  for (const auto& e : sft.log) CHECK(e.loss == sft.log.front().loss);

  Rng rng(1);
  const auto start = fixtures::random_params(rng, 0.3);
  const auto pref = train_pref(start, data().pairs, cfg);
  CHECK(pref.params == start);
  for (const auto& e : pref.log) CHECK(e.loss == pref.log.front().loss);
}

TEST_CASE("preference stage") {
  TrainConfig cfg;
  const auto sft = train_sft(data().sft, cfg);
  const auto before = checksum(sft.params);

  std::map<Method, PolicyParams> finals;
  for (auto m : kAllMethods) {
    if (m == Method::sft) continue;
    cfg.objective.method = m;
    const auto r = train_pref(sft.params, data().pairs, cfg, data().val);
    CAPTURE(method_name(m));
    CHECK(r.log.front().loss == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(r.log.front().mean_z == 0.0);
    CHECK(r.reference_checksum == before);
    CHECK(r.params.all_finite());
    // Mean training score at the returned checkpoint is above its start.
    const auto z = preference_loss(r.params, clone_frozen(sft.params), data().pairs, cfg.objective).mean_z;
    CHECK(z > 0.0);
    CHECK(non_increasing_share(r.log) >= 0.9);
    bool has_val = false;
    for (const auto& e : r.log) has_val = has_val || (e.split == "val" && e.compliance.has_value());
    CHECK(has_val);
    finals.emplace(m, r.params);
  }
  CHECK(checksum(sft.params) == before);
  CHECK(finals.at(Method::dpo) != finals.at(Method::tipo));

  cfg.objective.method = Method::tipo;
  CHECK(train_pref(sft.params, data().pairs, cfg, data().val).params == finals.at(Method::tipo));
}

TEST_CASE("early stopping returns the best validation checkpoint") {
  TrainConfig cfg;
  cfg.epochs_pref = 60;
  const auto sft = train_sft(data().sft, cfg);
  const auto r = train_pref(sft.params, data().pairs, cfg, data().val);
  double best = -1.0;
  int best_epoch = 0;
  for (const auto& e : r.log)
    if (e.split == "val" && *e.compliance > best) {
      best = *e.compliance;
      best_epoch = e.epoch;
    }
  CHECK(r.best_epoch == best_epoch);
  CHECK(evaluate(r.params, data().val, cfg.max_len).overall.compliance == best);
}

TEST_CASE("errors") {
  TrainConfig cfg;
  cfg.objective.method = Method::sft;
  CHECK_THROWS_AS(train_pref(PolicyParams{}, data().pairs, cfg), ConfigError);
  cfg = {};
  CHECK_THROWS_AS(train_pref(PolicyParams{}, {}, cfg), PreconditionError);
  CHECK_THROWS_AS(train_sft({}, cfg), PreconditionError);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train_sft(data().sft, cfg), ConfigError);

  cfg = {};
  cfg.lr_sft = 1.7e308;
  cfg.momentum = 0.9;
  CHECK_THROWS_AS(train_sft(data().sft, cfg), DivergenceError);
}

TEST_CASE("training log csv") {
  const std::vector<EpochLog> log{{0, "train", 0.5, 0.0, std::nullopt}, {5, "val", 0.25, 1.5, 42.0}};
  CHECK(training_log_csv(log) ==
        "epoch,split,loss,mean_z,compliance\n"
        "0,train,0.500000000,0.000000000,\n"
        "5,val,0.250000000,1.500000000,42.0000\n");
}
