#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qtime/config.hpp"

namespace qtime::experiments {

struct Artifact {
    std::string name;
    std::string content;
};

/// Files to emit (summary.json included) and whether a certification-type
/// check failed.
struct Outcome {
    std::vector<Artifact> files;
    nlohmann::json summary;
    bool certification_failed = false;
};

/// Runs the experiment named by cfg.kind; output depends only on cfg.
Outcome run(const config::ExperimentConfig& cfg);

}  // namespace qtime::experiments
