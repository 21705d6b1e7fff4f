#include "qtime/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <toml.hpp>

namespace qtime::config {

namespace {

enum class Type { Int, Real, Bool, String };

struct ParamSpec {
    std::string name;
    Type type;
    nlohmann::json def;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_open = false;
    std::vector<std::string> choices = {};
};

constexpr double kInf = std::numeric_limits<double>::infinity();

ParamSpec real(std::string name, double def, double lo, double hi, bool lo_open = false) {
    return {std::move(name), Type::Real, def, lo, hi, lo_open};
}
ParamSpec integer(std::string name, long def, double lo, double hi) {
    return {std::move(name), Type::Int, def, lo, hi, false};
}
ParamSpec choice(std::string name, std::string def, std::vector<std::string> choices) {
    return {std::move(name), Type::String, def, -kInf, kInf, false, std::move(choices)};
}

const std::map<std::string, std::vector<ParamSpec>>& schema() {
    static const std::map<std::string, std::vector<ParamSpec>> s = {
        {"ode-compare",
         {choice("potential", "quadratic", {"quadratic", "anisotropic", "logcosh", "linear"}),
          integer("dim", 2, 1, 8), real("T", 0.2, 0, 10, true), real("dt", 1e-4, 0, 1, true),
          real("t_lo", 1e-3, 0, kInf, true), real("t_hi", 1e-1, 0, kInf, true),
          integer("samples", 40, 3, 10000), real("x0_jitter", 0.0, 0, 1)}},
        {"gas-heat",
         {integer("n", 256, 16, 65536), real("gamma", 1.0, 1, 5), real("kappa", 1.0, 0, kInf, true),
          real("amplitude", 0.1, 0, 0.9, true), integer("mode", 1, 1, 64),
          real("decay_theta", 0.005, 0, 1, true), real("t_max", 0.1, 0, 1, true),
          integer("samples", 8, 3, 100)}},
        {"string-vs-curve",
         {integer("N", 128, 16, 8192), real("R0", 0.3, 0, 10, true), real("eps", 0.05, 0, 10, true),
          real("T", 0.1, 0, 10, true), integer("samples", 6, 2, 100)}},
        {"curve-run",
         {integer("N", 256, 8, 65536), real("R0", 0.25, 0, 10, true), real("eps", 0.0, 0, 10),
          real("theta_frac", 0.45, 0, 0.5, true), real("dtheta_scale", 0.05, 0, 10, true),
          integer("record_every", 50, 1, 1000000)}},
        {"eulerian-run",
         {integer("n", 128, 8, 1024), real("R0", 0.25, 0, 0.5, true),
          real("kernel_width", 2.0, 1.5, 64), real("theta_frac", 0.3, 0, 0.5, true),
          integer("frames", 31, 2, 100000), real("noise", 0.0, 0, 1)}},
        {"certify",
         {integer("n", 64, 8, 1024), real("R0", 0.25, 0, 0.5, true), real("kernel_width", 2.0, 1.5, 64),
          real("theta_frac", 0.3, 0, 0.5, true), integer("frames", 41, 3, 100000),
          real("lambda", 1.0, 0, kInf, true), real("tolerance_rel", 1e-3, 0, 1),
          real("corrupt_scale", 1.0, 0, 10, true)}},
        {"weak-strong",
         {integer("n", 64, 8, 1024), real("T", 0.2, 0, 10, true), integer("frames", 21, 2, 100000),
          real("misalignment", 0.0, 0, 1), real("wrong_velocity", 0.0, 0, 10),
          real("tolerance_rel", 1e-8, 0, 1)}},
    };
    return s;
}

struct Entry {
    nlohmann::json value;
    int line = 0;
};

int line_of_key(const std::string& text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

int line_of_offset(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

std::map<std::string, Entry> read_toml(const std::string& text) {
    toml::table tbl;
    try {
        tbl = toml::parse(text);
    } catch (const toml::parse_error& e) {
        throw ConfigError(std::string(e.description()), static_cast<int>(e.source().begin.line));
    }
    std::map<std::string, Entry> out;
    for (auto&& [k, node] : tbl) {
        const int line = static_cast<int>(node.source().begin.line);
        const std::string key(k.str());
        Entry e{nullptr, line};
        if (auto v = node.as_integer()) {
            e.value = v->get();
        } else if (auto f = node.as_floating_point()) {
            e.value = f->get();
        } else if (auto b = node.as_boolean()) {
            e.value = b->get();
        } else if (auto s = node.as_string()) {
            e.value = s->get();
        } else {
            throw ConfigError("key '" + key + "' must be a scalar", line);
        }
        out[key] = std::move(e);
    }
    return out;
}

std::map<std::string, Entry> read_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(e.what(), line_of_offset(text, e.byte));
    }
    if (!j.is_object()) throw ConfigError("config must be an object", 1);
    std::map<std::string, Entry> out;
    for (auto& [k, v] : j.items()) {
        const int line = line_of_key(text, k);
        if (v.is_object() || v.is_array() || v.is_null()) {
            throw ConfigError("key '" + k + "' must be a scalar", line);
        }
        out[k] = Entry{v, line};
    }
    return out;
}

nlohmann::json checked(const ParamSpec& p, const Entry& e) {
    const auto& v = e.value;
    switch (p.type) {
        case Type::Bool:
            if (!v.is_boolean()) throw ConfigError("'" + p.name + "' must be a boolean", e.line);
            return v;
        case Type::String: {
            if (!v.is_string()) throw ConfigError("'" + p.name + "' must be a string", e.line);
            const auto s = v.get<std::string>();
            if (!p.choices.empty() && std::find(p.choices.begin(), p.choices.end(), s) == p.choices.end()) {
                std::string all;
                for (const auto& c : p.choices) all += (all.empty() ? "" : ", ") + c;
                throw ConfigError("'" + p.name + "' must be one of: " + all, e.line);
            }
            return v;
        }
        case Type::Int:
        case Type::Real: {
            if (!v.is_number()) throw ConfigError("'" + p.name + "' must be a number", e.line);
            if (p.type == Type::Int && !v.is_number_integer()) {
                throw ConfigError("'" + p.name + "' must be an integer", e.line);
            }
            const double x = v.get<double>();
            const bool below = p.lo_open ? !(x > p.lo) : !(x >= p.lo);
            if (!std::isfinite(x) || below || x > p.hi) {
                std::ostringstream os;
                os << "'" << p.name << "' = " << x << " is out of range " << (p.lo_open ? "(" : "[")
                   << p.lo << ", " << p.hi << "]";
                throw ConfigError(os.str(), e.line);
            }
            return p.type == Type::Int ? nlohmann::json(v.get<long>()) : nlohmann::json(x);
        }
    }
    return v;
}

ExperimentConfig build(std::map<std::string, Entry> entries) {
    ExperimentConfig cfg;
    auto kind_it = entries.find("kind");
    if (kind_it == entries.end()) throw ConfigError("missing required key 'kind'", 0);
    if (!kind_it->second.value.is_string()) throw ConfigError("'kind' must be a string", kind_it->second.line);
    cfg.kind = kind_it->second.value.get<std::string>();
    const auto& sc = schema();
    const auto spec_it = sc.find(cfg.kind);
    if (spec_it == sc.end()) throw ConfigError("unknown experiment kind '" + cfg.kind + "'", kind_it->second.line);
    entries.erase(kind_it);

    if (auto it = entries.find("out"); it != entries.end()) {
        if (!it->second.value.is_string()) throw ConfigError("'out' must be a string", it->second.line);
        cfg.out = it->second.value.get<std::string>();
        entries.erase(it);
    }
    if (auto it = entries.find("seed"); it != entries.end()) {
        const auto& v = it->second.value;
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw ConfigError("'seed' must be a nonnegative integer", it->second.line);
        }
        cfg.seed = v.get<std::uint64_t>();
        entries.erase(it);
    }
    for (const auto& p : spec_it->second) {
        auto it = entries.find(p.name);
        if (it == entries.end()) {
            cfg.params[p.name] = p.def;
        } else {
            cfg.params[p.name] = checked(p, it->second);
            entries.erase(it);
        }
    }
    if (!entries.empty()) {
        const auto& [k, e] = *std::min_element(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            return a.second.line < b.second.line;
        });
        throw ConfigError("unknown key '" + k + "' for kind '" + cfg.kind + "'", e.line);
    }
    return cfg;
}

}  // namespace

nlohmann::json ExperimentConfig::echo() const {
    return {{"kind", kind}, {"seed", seed}, {"params", params}};
}

std::vector<std::string> experiment_kinds() {
    std::vector<std::string> out;
    for (const auto& [k, v] : schema()) out.push_back(k);
    return out;
}

nlohmann::json describe_kind(const std::string& kind) {
    const auto it = schema().find(kind);
    if (it == schema().end()) throw ConfigError("unknown experiment kind '" + kind + "'", 0);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : it->second) {
        nlohmann::json d = {{"name", p.name}, {"default", p.def}};
        if (p.type == Type::Int || p.type == Type::Real) {
            d["min"] = std::isfinite(p.lo) ? nlohmann::json(p.lo) : nlohmann::json(nullptr);
            d["max"] = std::isfinite(p.hi) ? nlohmann::json(p.hi) : nlohmann::json(nullptr);
            d["min_exclusive"] = p.lo_open;
        }
        if (!p.choices.empty()) d["choices"] = p.choices;
        out.push_back(d);
    }
    return out;
}

ExperimentConfig parse_config(const std::string& text, Format format) {
    return build(format == Format::Json ? read_json(text) : read_toml(text));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file " + path.string(), 0);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path.extension() == ".json" ? Format::Json : Format::Toml);
}

}  // namespace qtime::config
