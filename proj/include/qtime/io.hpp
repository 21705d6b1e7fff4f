#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtime/eulerian.hpp"

namespace qtime::io {

/// "%.17g", so text output round-trips and hashes are stable.
std::string format_double(double x);

struct Column {
    std::string name;
    std::vector<double> values;
};

/// Header line plus one row per index; all columns must have equal length.
std::string csv_text(std::span<const Column> columns);

/// Two-space indented dump with a trailing newline.
std::string json_text(const nlohmann::json& j);

/// Writes to a sibling temporary file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string sha256_hex(const std::string& content);
std::string sha256_file(const std::filesystem::path& path);

/// Raw little-endian doubles of B then P, plus a JSON sidecar describing the
/// layout. Returns the serialized pair (binary, sidecar).
std::pair<std::string, std::string> field_snapshot(const eulerian::FieldState& s);

}  // namespace qtime::io
