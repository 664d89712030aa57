#ifndef QCSP_TOOLS_CLI_HPP
#define QCSP_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace qcsp::cli {

/// Exit code for unreadable or malformed input files.
inline constexpr int kInputError = 3;

/// Runs one command line (without the program name). Output goes only to
/// `out` and `err`, so runs are reproducible in-process.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qcsp::cli

#endif  // QCSP_TOOLS_CLI_HPP
