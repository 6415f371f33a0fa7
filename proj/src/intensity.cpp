#include "tipo/intensity.hpp"

#include <algorithm>
#include <cmath>

#include "tipo/error.hpp"

namespace tipo {

void ScoreConfig::validate() const {
  if (!(aligned_score > neutral_score && neutral_score > conflict_score))
    throw ConfigError("score config requires aligned_score > neutral_score > conflict_score");
  if (!(delta_max > 0.0) || !std::isfinite(delta_max))
    throw ConfigError("score config requires delta_max > 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw ConfigError("score config requires gamma >= 0");
}

int score_action(const Step& s, Persona p, const ScoreConfig& cfg) {
  if (s.is_placeholder()) return 0;
  const auto favoured = p == Persona::PrivacyFirst ? PrivacyCategory::Protective
                                                   : PrivacyCategory::Exposing;
  const auto c = s.category();
  if (c == PrivacyCategory::Neutral) return cfg.neutral_score;
  return c == favoured ? cfg.aligned_score : cfg.conflict_score;
}

int delta_score(const AlignedColumn& col, Persona p, const ScoreConfig& cfg) {
  return score_action(col.chosen, p, cfg) - score_action(col.rejected, p, cfg);
}

double intensity_weight(double delta, const ScoreConfig& cfg) {
  const double r = std::clamp(delta / cfg.delta_max, 0.0, 1.0);
  if (r == 0.0) return 0.0;
  return std::pow(r, cfg.gamma);
}

int padding_gate(const AlignedColumn& col) { return col.chosen.is_placeholder() ? 0 : 1; }

}  // namespace tipo
