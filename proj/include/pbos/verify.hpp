#pragma once

#include <string>
#include <vector>

namespace pbos {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Built-in invariant suite behind `pbos verify`: derivative agreement with
// finite differences, mixed-partial symmetry, LOLA and SOS(p = 1) agreement
// with a differentiated first-order surrogate, fixed-point preservation,
// zero-sum and cooperation identities, the preference-estimator guard,
// replay determinism, same-sign preference drift and the preference step scale.
std::vector<CheckResult> run_property_suite();

}  // namespace pbos
