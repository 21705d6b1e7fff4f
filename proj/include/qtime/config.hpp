#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtime/errors.hpp"

namespace qtime::config {

/// Parse or schema failure; line is 0 when unknown.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// A validated experiment: `params` holds every parameter of the kind with
/// defaults filled in.
struct ExperimentConfig {
    std::string kind;
    nlohmann::json params = nlohmann::json::object();
    std::string out;
    std::uint64_t seed = 0;

    /// kind, seed and params (not the output directory).
    nlohmann::json echo() const;
};

std::vector<std::string> experiment_kinds();

/// Parameter names, defaults and ranges of one kind as JSON.
nlohmann::json describe_kind(const std::string& kind);

enum class Format { Toml, Json };

ExperimentConfig parse_config(const std::string& text, Format format);
/// Format from the extension (.json, otherwise TOML).
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace qtime::config
