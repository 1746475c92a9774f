#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "projeq/reps.hpp"

namespace projeq {

/// Stable exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2, kExitData = 3 };

/// Runs the tool on argv-style arguments (without the program name).
/// Commands: verify, bases, train-vierer, train-spinor.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// A group and representation named on the command line, e.g.
/// "vierer" + "filter3x3", "cyclic-4" + "shift", "symmetric-4" + "tensor-2",
/// "alternating-5" + "perm". Throws ConfigError for unsupported names.
struct BasisRequest {
    std::string group;
    std::string rep;
    /// "real", "complex" or empty for the group's default field.
    std::string field;
};

LinearRep build_requested_rep(const BasisRequest& req);

/// Writes one JSON file per character (values and orthonormal basis) and,
/// for image representations, text renderings of each basis vector as a
/// grid. Returns the written paths.
std::vector<std::string> export_bases(const BasisRequest& req, const std::string& out_dir);

}  // namespace projeq
