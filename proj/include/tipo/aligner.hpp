#pragma once

#include <string>
#include <vector>

#include "tipo/core.hpp"

namespace tipo {

// Canonical identity key of a step: action name plus its identity-relevant
// arguments, sorted by key. Coordinates are dropped; values are lowercased
// and whitespace-collapsed. "tap|target=search", "no_action|".
std::string match_key(const Step& s);

struct AlignedColumn {
  int t = 0;
  Step chosen;
  Step rejected;

  friend bool operator==(const AlignedColumn&, const AlignedColumn&) = default;
};

struct AlignedPair {
  std::string task_id;
  Persona persona = Persona::PrivacyFirst;
  std::vector<AlignedColumn> columns;

  std::size_t size() const { return columns.size(); }
  friend bool operator==(const AlignedPair&, const AlignedPair&) = default;
};

// Aligns both branches to T = max(|y+|, |y-|) by inserting no_action into the
// shorter one. Among all placements, maximizes the number of columns with
// equal match keys; ties go to the lexicographically smallest set of
// placeholder columns. O(|y+| * |y-|).
AlignedPair align_pair(const PreferencePair& p);

std::size_t matched_columns(const AlignedPair& ap);
std::size_t placeholder_count(const AlignedPair& ap);

// Drops placeholders from one side, giving back the original trajectory.
Trajectory strip_chosen(const AlignedPair& ap);
Trajectory strip_rejected(const AlignedPair& ap);

std::vector<std::string> validate_aligned(const AlignedPair& ap);

}  // namespace tipo
