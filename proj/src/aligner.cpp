#include "tipo/aligner.hpp"

#include <algorithm>
#include <cctype>

#include "tipo/error.hpp"

namespace tipo {
namespace {

bool is_coordinate_key(const std::string& k) {
  static const std::array<std::string_view, 8> coords{"x", "y", "x1", "y1",
                                                      "x2", "y2", "dx", "dy"};
  return std::find(coords.begin(), coords.end(), k) != coords.end();
}

std::string canonical(std::string_view v) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : v) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

Trajectory strip(const AlignedPair& ap, bool chosen_side, Persona persona) {
  Trajectory t{ap.task_id, persona, {}};
  for (const auto& col : ap.columns) {
    const Step& s = chosen_side ? col.chosen : col.rejected;
    if (!s.is_placeholder()) t.steps.push_back(s);
  }
  return t;
}

}  // namespace

std::string match_key(const Step& s) {
  std::map<std::string, std::string> kept;
  for (const auto& [k, v] : s.args) {
    std::string key = canonical(k);
    if (is_coordinate_key(key)) continue;
    kept[key] = canonical(v);
  }
  std::string out{action_name(s.action)};
  out += '|';
  bool first = true;
  for (const auto& [k, v] : kept) {
    if (!first) out += ';';
    first = false;
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

AlignedPair align_pair(const PreferencePair& p) {
  if (p.chosen.steps.empty() || p.rejected.steps.empty())
    throw PreconditionError("align_pair: empty trajectory in pair for " + p.task_id);

  const bool chosen_longer = p.chosen.size() >= p.rejected.size();
  const auto& longer = chosen_longer ? p.chosen.steps : p.rejected.steps;
  const auto& shorter = chosen_longer ? p.rejected.steps : p.chosen.steps;
  const int n = static_cast<int>(longer.size());
  const int m = static_cast<int>(shorter.size());

  std::vector<std::string> lk(n), sk(m);
  for (int i = 0; i < n; ++i) lk[i] = match_key(longer[i]);
  for (int j = 0; j < m; ++j) sk[j] = match_key(shorter[j]);

  // best[i][j]: max matches aligning longer[i..] with shorter[j..], gaps only
  // in the shorter branch. Infeasible states (n-i < m-j) are never visited.
  std::vector<std::vector<int>> best(n + 1, std::vector<int>(m + 1, 0));
  for (int i = n - 1; i >= 0; --i) {
    for (int j = std::max(0, m - (n - i)); j <= m; ++j) {
      int v = -1;
      if (n - i > m - j) v = best[i + 1][j];
      if (j < m) v = std::max(v, best[i + 1][j + 1] + (lk[i] == sk[j] ? 1 : 0));
      best[i][j] = v;
    }
  }

  AlignedPair out{p.task_id, p.persona, {}};
  out.columns.reserve(n);
  int j = 0;
  for (int i = 0; i < n; ++i) {
    const bool can_gap = n - i > m - j;
    const bool gap = can_gap && (j == m || best[i + 1][j] == best[i][j]);
    Step filler = gap ? placeholder_step(i) : shorter[j];
    if (!gap) ++j;
    AlignedColumn col{i, {}, {}};
    if (chosen_longer) {
      col.chosen = longer[i];
      col.rejected = std::move(filler);
    } else {
      col.chosen = std::move(filler);
      col.rejected = longer[i];
    }
    out.columns.push_back(std::move(col));
  }
  return out;
}

std::size_t matched_columns(const AlignedPair& ap) {
  return std::count_if(ap.columns.begin(), ap.columns.end(), [](const auto& c) {
    return match_key(c.chosen) == match_key(c.rejected);
  });
}

std::size_t placeholder_count(const AlignedPair& ap) {
  std::size_t n = 0;
  for (const auto& c : ap.columns)
    n += c.chosen.is_placeholder() + c.rejected.is_placeholder();
  return n;
}

Trajectory strip_chosen(const AlignedPair& ap) { return strip(ap, true, ap.persona); }

Trajectory strip_rejected(const AlignedPair& ap) {
  return strip(ap, false, opposite(ap.persona));
}

std::vector<std::string> validate_aligned(const AlignedPair& ap) {
  std::vector<std::string> out;
  if (ap.columns.empty()) out.emplace_back("aligned pair has no columns");
  std::size_t chosen_gaps = 0, rejected_gaps = 0;
  for (std::size_t t = 0; t < ap.columns.size(); ++t) {
    const auto& c = ap.columns[t];
    if (c.t != static_cast<int>(t))
      out.push_back("column index mismatch at " + std::to_string(t));
    if (c.chosen.is_placeholder() && c.rejected.is_placeholder())
      out.push_back("two placeholders in column " + std::to_string(t));
    chosen_gaps += c.chosen.is_placeholder();
    rejected_gaps += c.rejected.is_placeholder();
  }
  if (chosen_gaps && rejected_gaps)
    out.emplace_back("placeholders on both sides of the pair");
  return out;
}

}  // namespace tipo
