#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gridroute::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kNumerical = 3 };

/// Runs one command (`args` excludes the program name). Primary output goes
/// to `out`; failures print a single "error: <kind>: <message>" line to
/// `err` (followed by usage text for usage errors).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridroute::cli
