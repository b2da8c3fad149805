#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "efres/config.hpp"

namespace fs = std::filesystem;
using namespace efres;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(EFRES_CLI_PATH) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(rc);
    std::stringstream so, se;
    so << std::ifstream(out).rdbuf();
    se << std::ifstream(err).rdbuf();
    r.out = so.str();
    r.err = se.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::stringstream ss;
    ss << std::ifstream(p).rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("efres_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("--help documents every config key with its default") {
    const auto dir = fresh_dir("help");
    const auto r = run_cli("--help", dir);
    CHECK(r.exit_code == 0);
    for (const auto& key : config_schema()) {
        CAPTURE(key.name);
        CHECK(r.out.find(key.name + " = " + key.default_value) != std::string::npos);
        CHECK(r.out.find("[" + key.section + "]") != std::string::npos);
    }
    // the documented flags
    for (const char* flag :
         {"--config", "--params-preset", "--output", "--seed", "--jobs", "--format"})
        CHECK(r.out.find(flag) != std::string::npos);
}

TEST_CASE("missing config file exits with the config error code") {
    const auto dir = fresh_dir("missing");
    const auto r = run_cli("--config /nonexistent/path.ini compare", dir);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("/nonexistent/path.ini") != std::string::npos);
}

TEST_CASE("unknown config key is rejected") {
    const auto dir = fresh_dir("badkey");
    const fs::path cfg = dir / "bad.ini";
    std::ofstream(cfg) << "[params]\nnot_a_key = 1\n";
    const auto r = run_cli("--config " + cfg.string() + " compare", dir);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("not_a_key") != std::string::npos);
}

TEST_CASE("compare subcommand reports the scheme comparison") {
    const auto dir = fresh_dir("compare");
    const auto r = run_cli("--params-preset paper --output " + (dir / "out").string() +
                               " compare",
                           dir);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("306.8") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "manifest"));
    CHECK(fs::exists(dir / "out" / "data.csv"));
    const std::string summary = slurp(dir / "out" / "summary.txt");
    CHECK(summary.find("reduction_factor = 306.8") != std::string::npos);
}

TEST_CASE("spectrum subcommand emits the ladder table") {
    const auto dir = fresh_dir("spectrum");
    const fs::path cfg = dir / "cfg.ini";
    std::ofstream(cfg) << "[params]\nn_max = 12\n";
    const auto r = run_cli("--config " + cfg.string() + " --params-preset paper --output " +
                               (dir / "out").string() + " spectrum --levels 4",
                           dir);
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(dir / "out" / "data.csv");
    CHECK(csv.rfind("n,E_g,E_plus,E_minus,nu_plus,nu_minus,K_n,method", 0) == 0);
    CHECK(csv.find("numeric") != std::string::npos);
    CHECK(r.out.find("K_series = -346.5") != std::string::npos);
}

TEST_CASE("series method rejects a four-level request") {
    const auto dir = fresh_dir("badlevels");
    const fs::path cfg = dir / "cfg.ini";
    std::ofstream(cfg) << "[spectrum]\nmethod = exact3\n";
    const auto r = run_cli("--config " + cfg.string() + " --params-preset paper --output " +
                               (dir / "out").string() + " spectrum --levels 4",
                           dir);
    CHECK(r.exit_code == 3); // numeric/model failure
}

TEST_CASE("identical seed and config give byte-identical outputs") {
    const auto dir = fresh_dir("determinism");
    const auto r1 = run_cli("--params-preset paper --seed 7 --output " +
                                (dir / "a").string() + " calibrate --synthetic",
                            dir);
    const auto r2 = run_cli("--params-preset paper --seed 7 --output " +
                                (dir / "b").string() + " calibrate --synthetic",
                            dir);
    CHECK(r1.exit_code == 0);
    CHECK(r2.exit_code == 0);
    CHECK(slurp(dir / "a" / "data.csv") == slurp(dir / "b" / "data.csv"));
    CHECK(slurp(dir / "a" / "fit.txt") == slurp(dir / "b" / "fit.txt"));
    CHECK(slurp(dir / "a" / "manifest") == slurp(dir / "b" / "manifest"));

    const auto r3 = run_cli("--params-preset paper --seed 8 --output " +
                                (dir / "c").string() + " calibrate --synthetic",
                            dir);
    CHECK(r3.exit_code == 0);
    CHECK(slurp(dir / "a" / "data.csv") != slurp(dir / "c" / "data.csv"));
}

TEST_CASE("calibrate recovers the configured filling rate") {
    const auto dir = fresh_dir("calibrate");
    const auto r = run_cli("--params-preset paper --seed 7 --output " +
                               (dir / "out").string() + " calibrate --synthetic",
                           dir);
    CHECK(r.exit_code == 0);
    const std::string fit = slurp(dir / "out" / "fit.txt");
    const auto pos = fit.find("k_per_v = ");
    REQUIRE(pos != std::string::npos);
    const double k = std::stod(fit.substr(pos + 10));
    CHECK(std::abs(k - 2.29) / 2.29 < 0.01);
}

TEST_CASE("calibrate without input or synthetic flag is a usage error") {
    const auto dir = fresh_dir("usage");
    const auto r = run_cli("--output " + (dir / "out").string() + " calibrate", dir);
    CHECK(r.exit_code == 2);
}

TEST_CASE("svg output format produces plots") {
    const auto dir = fresh_dir("svg");
    const fs::path cfg = dir / "cfg.ini";
    std::ofstream(cfg) << "[params]\nn_max = 10\n[spectroscopy]\nnu_points = 101\n"
                          "re_beta = 0.7\nim_beta = 0\n";
    const auto r = run_cli("--config " + cfg.string() + " --params-preset paper --format " +
                               "csv+svg --output " + (dir / "out").string() + " spectroscopy",
                           dir);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "out" / "plot.svg"));
    const std::string svg = slurp(dir / "out" / "plot.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}
