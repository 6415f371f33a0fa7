#pragma once

// End-to-end orchestration shared by the CLI and the Python module: dataset
// files, per-method training runs and the multi-seed comparison.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tipo/acceptance.hpp"
#include "tipo/config.hpp"
#include "tipo/metrics.hpp"
#include "tipo/synthgen.hpp"
#include "tipo/trainer.hpp"

namespace tipo {

// tasks.jsonl, trajectories.jsonl, pairs.jsonl, splits.json
void save_dataset(const std::filesystem::path& dir, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& dir);

json splits_to_json(const Splits& s);
Splits splits_from_json(const json& j);

struct TrainingData {
  std::vector<SftExample> sft;
  std::vector<PreparedPair> pairs;
  std::vector<TaskRecord> val;
  std::vector<TaskRecord> test;
};

// Splits the dataset and precomputes contexts and alignments for training.
TrainingData prepare_training(const Dataset& ds, const FeatureTemplate& tmpl);

struct MethodRun {
  Method method = Method::tipo;
  PolicyParams params;
  std::vector<EpochLog> sft_log;
  std::vector<EpochLog> pref_log;
};

// SFT is shared across methods: pass its result to avoid retraining.
TrainResult run_sft(const TrainingData& data, const RunConfig& cfg);
MethodRun run_method(const TrainingData& data, const RunConfig& cfg, Method method,
                     const TrainResult& sft);

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<EvalResult> results;  // one per method, in kAllMethods order
  std::vector<AcceptanceCheck> checks;
};

struct ReproduceResult {
  std::vector<SeedResult> seeds;
  std::vector<EvalResult> mean;  // per-method means over seeds
  std::vector<AcceptanceCheck> checks;  // property checks, then trend checks
  bool all_passed() const;
  // Per-seed checks prefixed with their seed, then `checks`.
  std::vector<AcceptanceCheck> all_checks() const;
};

// Runs every method on one seeded dataset per seed, writes per-seed reports
// under out_dir/seed_<s>/ and the aggregated tables to out_dir. Also runs the
// seed-independent property checks unless `with_properties` is false.
ReproduceResult reproduce(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds,
                          const std::filesystem::path& out_dir, bool with_properties = true);

// Trend checks over seed-averaged results (Compliance, PD, SR ordering).
std::vector<AcceptanceCheck> trend_checks(const std::vector<EvalResult>& mean);

std::string summary_range_csv(const ReproduceResult& r);
std::string format_checks(const std::vector<AcceptanceCheck>& checks);

}  // namespace tipo
