#pragma once

// Command-line front end. One subcommand per experiment family; every run
// ends in a machine-readable report (JSON by default, flat CSV on request)
// whose params echo the fully materialized configuration, so identical
// invocations produce byte-identical report files. Timing goes to the error
// stream only. `batch` replays a JSON-lines file of invocations into a
// directory of reports plus a manifest.

#include <iosfwd>
#include <string>
#include <vector>

namespace treegroup {

// Runs one invocation. `args` excludes the program name. Exit codes:
//   0  success (including --help)
//   2  violated precondition (domain_error)
//   3  exceeded resource budget (resource_error)
//   1  any other failure
//   64 unrecognized flags or malformed command line (usage text on err)
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

} // namespace treegroup
