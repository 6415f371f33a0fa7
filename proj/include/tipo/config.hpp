#pragma once

// Run configuration: one JSON document with sections gen / train /
// objective / score / policy / eval plus out_dir. Unknown keys are rejected.

#include <filesystem>
#include <string>
#include <vector>

#include "tipo/jsonl.hpp"
#include "tipo/policy.hpp"
#include "tipo/synthgen.hpp"
#include "tipo/trainer.hpp"

namespace tipo {

struct RunConfig {
  GenConfig gen;
  TrainConfig train;  // train.objective carries method, beta and the score config
  FeatureTemplate features;
  int max_len = kDefaultMaxLen;
  std::string out_dir = "out";

  void set_seed(std::uint64_t seed) {
    gen.seed = seed;
    train.seed = seed;
  }
  void validate() const;
};

json to_json(const RunConfig& cfg);
RunConfig config_from_json(const json& j);

// `key=value` with a dotted key ("train.lr_pref=0.2"). The value is parsed
// as JSON when possible, otherwise taken as a string.
void apply_override(json& j, const std::string& assignment);

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);
RunConfig default_config_with(const std::vector<std::string>& overrides);

}  // namespace tipo
