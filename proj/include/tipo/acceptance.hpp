#pragma once

// Property checks behind the acceptance criteria that do not need a full
// training run: gradient fidelity, gate nullification, the step-DPO
// reduction, the alignment oracle and the intensity weight.

#include <cstdint>
#include <string>
#include <vector>

namespace tipo {

struct AcceptanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
  int criterion = 0;  // acceptance criterion number, 0 when not tied to one
};

namespace acceptance {

// Analytic vs central-difference gradients (eps 1e-5) for every objective,
// `probes` coordinates each, plus grad_log_prob on 2 * probes contexts.
AcceptanceCheck gradient_fidelity(std::uint64_t seed = 1, int probes = 50);

// Columns whose chosen side is a placeholder leave the TIPO gradient
// bit-for-bit untouched.
AcceptanceCheck gate_nullification(std::uint64_t seed = 2);

// TIPO on batches where every column has alpha = 1 and gate = 1, and the
// step-DPO objective on arbitrary batches, against a direct evaluation of
// the step-DPO formula.
AcceptanceCheck reduction_identity(std::uint64_t seed = 3, int batches = 100);

// DP alignment against exhaustive enumeration of placeholder sets, the
// strip/recovery round trip and T = max(|y+|, |y-|).
AcceptanceCheck alignment_oracle(std::uint64_t seed = 4);

// Range, monotonicity and clipping of the intensity weight.
AcceptanceCheck weight_function(std::uint64_t seed = 5, int samples = 10000);

// All of the above, in criterion order.
std::vector<AcceptanceCheck> property_checks();

}  // namespace acceptance
}  // namespace tipo
