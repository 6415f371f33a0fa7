#pragma once

// Seeded random inputs shared by the acceptance checks, the unit tests and
// the Python smoke tests.

#include <cstdint>
#include <vector>

#include "tipo/objectives.hpp"
#include "tipo/rng.hpp"
#include "tipo/synthgen.hpp"

namespace tipo::fixtures {

// Steps drawn from `actions` (no_action excluded), each with a target picked
// from a small vocabulary so that match keys collide often.
Trajectory random_trajectory(Rng& rng, int len, Persona persona,
                             const std::vector<ActionType>& actions, int n_targets = 2);

// Branches of independent lengths in [1, max_len] over a small alphabet.
PreferencePair random_pair(Rng& rng, int max_len);

// Every weight ~ N(0, scale^2).
PolicyParams random_params(Rng& rng, double scale, const FeatureTemplate& tmpl = {});

StepContext random_context(Rng& rng, const FeatureTemplate& tmpl = {});

// A small generated dataset with prepared pairs and SFT examples for both
// personas of every task.
struct Batch {
  Dataset dataset;
  std::vector<PreparedPair> pairs;
  std::vector<SftExample> sft;
};
Batch generated_batch(int n_tasks, std::uint64_t seed, const FeatureTemplate& tmpl = {});

// Random pairs prepared against a random task context.
std::vector<PreparedPair> random_prepared(Rng& rng, int n_pairs, int max_len,
                                          const FeatureTemplate& tmpl = {});

}  // namespace tipo::fixtures
