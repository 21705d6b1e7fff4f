#include "qtime/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qtime/errors.hpp"

namespace qtime::io {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_text(std::span<const Column> columns) {
    if (columns.empty()) throw ArgumentError("csv needs at least one column");
    const std::size_t rows = columns[0].values.size();
    for (const auto& c : columns) {
        if (c.values.size() != rows) throw ArgumentError("csv column '" + c.name + "' has a different length");
    }
    std::string out;
    for (std::size_t j = 0; j < columns.size(); ++j) out += (j ? "," : "") + columns[j].name;
    out += '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (j) out += ',';
            out += format_double(columns[j].values[i]);
        }
        out += '\n';
    }
    return out;
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw Error("write to " + tmp.string() + " failed");
    }
    std::filesystem::rename(tmp, path);
}

std::string sha256_hex(const std::string& content) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(content.data(), content.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return sha256_hex(ss.str());
}

std::pair<std::string, std::string> field_snapshot(const eulerian::FieldState& s) {
    std::string bin;
    auto append = [&bin](const std::vector<double>& v) {
        const auto off = bin.size();
        bin.resize(off + v.size() * sizeof(double));
        if (!v.empty()) std::memcpy(bin.data() + off, v.data(), v.size() * sizeof(double));
    };
    append(s.B);
    append(s.P);
    nlohmann::json side = {
        {"dims", s.d},
        {"n", s.n},
        {"spacing", s.h()},
        {"theta", s.theta},
        {"rho_floor", s.rho_floor},
        {"layout", "component-major, row-major grid, last axis fastest"},
        {"arrays", s.P.empty() ? nlohmann::json::array({"B"}) : nlohmann::json::array({"B", "P"})},
        {"dtype", "float64-le"},
    };
    return {bin, json_text(side)};
}

}  // namespace qtime::io
