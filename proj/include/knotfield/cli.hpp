#pragma once
#include <iosfwd>
#include <string>
#include <vector>

namespace knotfield {

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitVerification = 2, kExitNumerical = 3 };

// Entry point shared by the executable and the tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// CSV with a header row to a JSON array of objects; numeric fields stay numbers.
std::string csv_to_json(const std::string& csv);

}  // namespace knotfield
