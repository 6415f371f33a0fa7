#pragma once

// Persona-aware step scoring, preference-intensity weights and the padding
// gate applied to aligned columns.

#include "tipo/aligner.hpp"
#include "tipo/core.hpp"

namespace tipo {

struct ScoreConfig {
  int aligned_score = 2;
  int conflict_score = -2;
  int neutral_score = 0;
  double delta_max = 4.0;
  double gamma = 1.0;

  void validate() const;  // throws ConfigError
};

// no_action scores 0 regardless of persona.
int score_action(const Step& s, Persona p, const ScoreConfig& cfg);

// Score(chosen) - Score(rejected).
int delta_score(const AlignedColumn& col, Persona p, const ScoreConfig& cfg);

// clip(delta / delta_max, 0, 1)^gamma with 0^0 = 0.
double intensity_weight(double delta, const ScoreConfig& cfg);

// 0 iff the chosen side is a placeholder.
int padding_gate(const AlignedColumn& col);

}  // namespace tipo
