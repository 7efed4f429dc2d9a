#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bampf {

/**
 * Full command-line front end. `args` excludes the program name. Writes
 * artifacts under --out (or $BAMPF_LAB_OUT, or ./out), prints the primary
 * report to `out` and machine-readable error records to `err`.
 *
 * Exit codes: 0 success, 1 validation/usage error, 2 failed verification
 * (bound violated, certificate not granted, counterexample not confirmed).
 */
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bampf
