#pragma once

// Command-line frontend. `run` is the whole program minus process plumbing so
// that tests can drive it with in-memory streams.

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace srgeo::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kIntegrationError = 2,
  kConjugateEndpoint = 3,
  kSearchFailure = 4,
  kVerificationFailure = 5,
};

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// JSON text with every floating-point number written with 17 significant digits.
std::string dump_json(const nlohmann::json& j, int indent = 2);

}  // namespace srgeo::cli
