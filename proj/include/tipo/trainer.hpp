#pragma once

// Two-stage optimization: SFT from zero weights, then a preference objective
// against a frozen copy of the SFT solution. Plain minibatch SGD.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tipo/metrics.hpp"
#include "tipo/objectives.hpp"

namespace tipo {

struct TrainConfig {
  double lr_sft = 0.5;
  double lr_pref = 1.0;
  int epochs_sft = 30;
  int epochs_pref = 30;
  int batch_size = 16;
  std::uint64_t seed = 7;
  bool shuffle = true;
  double momentum = 0.0;
  // Preference stage: validation Compliance is checked every `eval_every`
  // epochs; training stops after `patience` checks without improvement and
  // the best checkpoint is returned.
  int eval_every = 5;
  int patience = 3;
  int max_len = kDefaultMaxLen;
  ObjectiveConfig objective;

  void validate() const;  // throws ConfigError
};

struct EpochLog {
  int epoch = 0;
  std::string split;  // "train" or "val"
  double loss = 0.0;
  double mean_z = 0.0;
  std::optional<double> compliance;
};

struct TrainResult {
  PolicyParams params;
  std::vector<EpochLog> log;  // epoch 0 is the starting point
  int best_epoch = 0;
  std::uint64_t reference_checksum = 0;  // preference stage: checked every epoch
};

TrainResult train_sft(std::span<const SftExample> data, const TrainConfig& cfg,
                      const FeatureTemplate& tmpl = {});

// The reference policy is a frozen clone of `sft_params`. Validation records
// enable early stopping on Compliance.
TrainResult train_pref(const PolicyParams& sft_params, std::span<const PreparedPair> pairs,
                       const TrainConfig& cfg, std::span<const TaskRecord> val = {});

// Header: epoch,split,loss,mean_z,compliance
std::string training_log_csv(const std::vector<EpochLog>& log);

}  // namespace tipo
