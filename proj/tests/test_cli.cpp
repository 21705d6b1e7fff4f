#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "qtime/config.hpp"
#include "qtime/experiments.hpp"
#include "qtime/io.hpp"

namespace fs = std::filesystem;
using qtime::config::ConfigError;
using qtime::config::Format;
using qtime::config::parse_config;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("qtime_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int qtime_exit(const std::string& args) {
    const std::string cmd = std::string(QTIME_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_file(const std::string& name) { return (fs::path(QTIME_CONFIGS) / name).string(); }

int error_line(const std::string& text, Format f) {
    try {
        parse_config(text, f);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

std::string error_text(const std::string& text, Format f) {
    try {
        parse_config(text, f);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("config defaults are filled and echoed") {
    const auto cfg = parse_config("kind = \"gas-heat\"\nn = 64\n", Format::Toml);
    CHECK(cfg.kind == "gas-heat");
    CHECK(cfg.params.at("n") == 64);
    CHECK(cfg.params.at("gamma") == 1.0);
    CHECK(cfg.seed == 0);
    const auto echo = cfg.echo();
    CHECK(echo.at("kind") == "gas-heat");
    CHECK(echo.at("params").at("n") == 64);
    for (const auto& k : qtime::config::experiment_kinds()) {
        CHECK(!qtime::config::describe_kind(k).empty());
    }
}

TEST_CASE("TOML and JSON configs are equivalent") {
    const auto t = parse_config("kind = \"certify\"\nn = 32\nlambda = 2.5\nseed = 7\n", Format::Toml);
    const auto j = parse_config(R"({"kind": "certify", "n": 32, "lambda": 2.5, "seed": 7})", Format::Json);
    CHECK(t.echo() == j.echo());
}

TEST_CASE("config errors carry the offending line") {
    SUBCASE("unknown key") {
        const std::string toml = "kind = \"gas-heat\"\nn = 64\nbogus = 1\n";
        CHECK(error_line(toml, Format::Toml) == 3);
        CHECK(error_text(toml, Format::Toml).find("bogus") != std::string::npos);
        const std::string json = "{\n  \"kind\": \"gas-heat\",\n  \"bogus\": 1\n}\n";
        CHECK(error_line(json, Format::Json) == 3);
    }
    SUBCASE("nonpositive lambda names the key") {
        const std::string toml = "kind = \"certify\"\nlambda = 0.0\n";
        CHECK(error_line(toml, Format::Toml) == 2);
        CHECK(error_text(toml, Format::Toml).find("lambda") != std::string::npos);
        CHECK(error_line("kind = \"certify\"\n\nlambda = -1.0\n", Format::Toml) == 3);
    }
    SUBCASE("type and range") {
        CHECK(error_line("kind = \"gas-heat\"\nn = 64.5\n", Format::Toml) == 2);
        CHECK(error_line("kind = \"gas-heat\"\nn = 4\n", Format::Toml) == 2);
        CHECK(error_line("kind = \"ode-compare\"\npotential = \"cubic\"\n", Format::Toml) == 2);
        CHECK(error_line("kind = \"ode-compare\"\ndt = -1e-4\n", Format::Toml) == 2);
        CHECK(error_line("kind = \"gas-heat\"\nseed = -3\n", Format::Toml) == 2);
    }
    SUBCASE("syntax") {
        CHECK(error_line("kind = \"gas-heat\"\nn = = 3\n", Format::Toml) == 2);
        CHECK(error_line("{\n\"kind\": \"gas-heat\",\n\"n\": }\n", Format::Json) == 3);
    }
    SUBCASE("missing or unknown kind") {
        CHECK(error_text("n = 64\n", Format::Toml).find("kind") != std::string::npos);
        CHECK(error_line("kind = \"nope\"\n", Format::Toml) == 1);
    }
}

TEST_CASE("csv and json text") {
    CHECK(qtime::io::format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(qtime::io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
    const qtime::io::Column cols[] = {{"a", {1.0, 2.5}}, {"b", {-1.0, 0.0}}};
    CHECK(qtime::io::csv_text(cols) == "a,b\n1,-1\n2.5,0\n");
    const qtime::io::Column bad[] = {{"a", {1.0}}, {"b", {}}};
    CHECK_THROWS(qtime::io::csv_text(bad));
    CHECK(qtime::io::json_text({{"x", 1}}) == "{\n  \"x\": 1\n}\n");
}

TEST_CASE("sha256 and atomic writes") {
    CHECK(qtime::io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(qtime::io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const auto dir = scratch("io");
    const auto p = dir / "nested" / "out.txt";
    qtime::io::write_atomic(p, "first");
    qtime::io::write_atomic(p, "second");
    CHECK(slurp(p) == "second");
    CHECK(!fs::exists(dir / "nested" / "out.txt.tmp"));
    CHECK(qtime::io::sha256_file(p) == qtime::io::sha256_hex("second"));
}

TEST_CASE("field snapshot layout") {
    auto s = qtime::eulerian::make_field(2, 8, std::vector<double>(2 * 64, 0.5));
    const auto [bin, side] = qtime::io::field_snapshot(s);
    CHECK(bin.size() == 2 * 64 * sizeof(double));
    const auto j = nlohmann::json::parse(side);
    CHECK(j.at("n") == 8);
    CHECK(j.at("arrays").size() == 1);
    s.P.assign(2 * 64, 0.0);
    CHECK(qtime::io::field_snapshot(s).first.size() == 2 * 2 * 64 * sizeof(double));
}

TEST_CASE("experiment output depends only on the config") {
    const auto cfg = parse_config("kind = \"ode-compare\"\nT = 0.05\ndt = 1e-3\nt_hi = 0.04\nx0_jitter = 0.1\nseed = 3\n",
                                  Format::Toml);
    const auto a = qtime::experiments::run(cfg);
    const auto b = qtime::experiments::run(cfg);
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) {
        CHECK(a.files[i].name == b.files[i].name);
        CHECK(a.files[i].content == b.files[i].content);
    }
    CHECK(a.files.back().name == "summary.json");
}

TEST_CASE("command line exit codes") {
    const auto dir = scratch("cli");
    CHECK(qtime_exit("list") == 0);
    CHECK(qtime_exit("validate --config " + config_file("certify_circle.toml")) == 0);
    CHECK(qtime_exit("validate --config " + (dir / "missing.toml").string()) == 2);

    const auto bad = dir / "bad.toml";
    qtime::io::write_atomic(bad, "kind = \"ode-compare\"\ndt = -0.001\n");
    const auto bad_out = dir / "bad_out";
    CHECK(qtime_exit("run --config " + bad.string() + " --out " + bad_out.string()) == 2);
    CHECK(!fs::exists(bad_out));

    CHECK(qtime_exit("run --config " + config_file("certify_corrupted.toml") + " --out " + (dir / "corrupt").string()) ==
          4);
    CHECK(fs::exists(dir / "corrupt" / "manifest.json"));
    CHECK(qtime_exit("bogus") != 0);
}

TEST_CASE("reruns produce identical manifest hashes") {
    const auto dir = scratch("rerun");
    const std::string cfg = config_file("ode_quadratic.toml");
    REQUIRE(qtime_exit("run --config " + cfg + " --out " + (dir / "a").string()) == 0);
    REQUIRE(qtime_exit("--threads 2 run --config " + cfg + " --out " + (dir / "b").string()) == 0);
    const auto ma = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
    const auto mb = nlohmann::json::parse(slurp(dir / "b" / "manifest.json"));
    CHECK(ma.at("files") == mb.at("files"));
    CHECK(ma.at("config") == mb.at("config"));
    for (const auto& f : ma.at("files")) {
        CHECK(qtime::io::sha256_file(dir / "a" / f.at("name").get<std::string>()) == f.at("sha256"));
    }
    fs::remove_all(dir.parent_path());
}
