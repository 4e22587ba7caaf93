#pragma once

// Invariant batteries behind `verify`: constant speed (r1), regularity and
// pairing constancy (r2), continuity along nearby rays (r3) and agreement with
// the Heisenberg closed forms (oracle).

#include <string>
#include <vector>

namespace srgeo {

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  double value = 0.0;  // measured quantity
  double limit = 0.0;  // documented tolerance
  std::string detail;
};

/// Suite names: r1, r2, r3, oracle, all. Throws InvalidArgument otherwise.
std::vector<CheckResult> run_verify_suite(const std::string& suite, unsigned long long seed = 42);

const std::vector<std::string>& verify_suite_names();

}  // namespace srgeo
