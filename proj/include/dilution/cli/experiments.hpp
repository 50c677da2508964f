#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dilution/cli/manifest.hpp"

namespace dl::cli {

struct ExperimentInfo {
    std::string id;
    std::string description;
    std::string outputs;  // files written per run
};

const std::vector<ExperimentInfo>& experiment_catalog();

// Command-line values that replace manifest fields before hashing.
struct Overrides {
    std::optional<std::string> out;
    std::optional<long long> seed;
    std::optional<std::string> mitigate;  // lin, exp or both
};

// Raw manifest {experiment, config?, params?, output?, seed?} -> normalized
// manifest with every default filled in. Throws ValidationError listing all problems.
json validate_manifest(const json& raw, const Overrides& ov = {});

// Hash of the normalized manifest without the output directory.
std::string manifest_hash(const json& normalized);

struct ArtifactSet {
    std::string dir;
    std::string hash;
    std::vector<std::string> files;
    json summary;
};

// Runs a normalized manifest and writes one CSV per panel plus summary.json.
// Throws BudgetError when the requested sizes exceed an engine limit.
ArtifactSet run_manifest(const json& normalized);

}  // namespace dl::cli
