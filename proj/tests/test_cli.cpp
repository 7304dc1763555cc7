#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" RINGKAM_CLI "\" " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh(const std::string& name) {
    const fs::path p = fs::current_path() / ("cli_" + name);
    fs::remove_all(p);
    return p;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = fs::current_path() / (name + ".ini");
    std::ofstream(p) << text;
    return p;
}

// Structural comparison; numbers at paths listed in `tol` compare with that absolute tolerance.
void compare(const json& got, const json& want, const json& tol, const std::string& path) {
    INFO("field " << path);
    REQUIRE(got.type() == want.type());
    if (want.is_object()) {
        CHECK(got.size() == want.size());
        for (auto it = want.begin(); it != want.end(); ++it) {
            REQUIRE(got.contains(it.key()));
            compare(got.at(it.key()), it.value(), tol, path.empty() ? it.key() : path + "." + it.key());
        }
    } else if (want.is_array()) {
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) compare(got[i], want[i], tol, path);
    } else if (want.is_number_float()) {
        const double eps = tol.contains(path) ? tol.at(path).get<double>() : 0.0;
        CHECK(std::abs(got.get<double>() - want.get<double>()) <= eps);
    } else {
        CHECK(got == want);
    }
}

const char* kSmall = "n_bands = 8\nn_time = 16\n";

}  // namespace

TEST_CASE("spectrum smoke run") {
    const auto out = fresh("spectrum");
    const auto cfg = write_config("small", kSmall);
    CHECK(run_cli("spectrum --config " + cfg.string() + " --out " + out.string()) == 0);
    for (const char* f : {"energies.csv", "traces.csv", "spectrum_report.json", "manifest.json"})
        CHECK(fs::exists(out / f));
    const json manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest.at("subcommand") == "spectrum");
    CHECK(manifest.at("config").get<std::string>().find("n_bands = 8") != std::string::npos);
    CHECK(manifest.at("inputs").contains("config"));
    CHECK(manifest.at("outputs").size() == 3);
    CHECK(manifest.contains("timestamp"));
    CHECK(manifest.contains("tool_version"));
}

TEST_CASE("spectrum report matches the golden file") {
    const auto out = fresh("golden");
    const auto cfg = write_config("small", kSmall);
    REQUIRE(run_cli("spectrum --config " + cfg.string() + " --out " + out.string()) == 0);
    const json golden = json::parse(slurp(fs::path(RINGKAM_GOLDEN) / "spectrum_small.json"));
    const json got = json::parse(slurp(out / "spectrum_report.json"));
    compare(got, golden.at("expected"), golden.at("tolerances"), "");
}

TEST_CASE("resonant kam run exits 2 with a witness and nothing else") {
    const auto out = fresh("kam_resonant");
    CHECK(run_cli("kam --override n_bands=8 --override n_time=32 --out " + out.string()) == 2);
    REQUIRE(fs::exists(out / "error.json"));
    CHECK(std::distance(fs::directory_iterator(out), fs::directory_iterator()) == 1);
    const json err = json::parse(slurp(out / "error.json"));
    CHECK(err.at("error") == "Resonant");
    const json& w = err.at("detail").at("witness");
    CHECK(w.at("k").get<int>() >= 1);
    CHECK(w.at("n").get<int>() > w.at("m").get<int>());
}

TEST_CASE("evolve rerun from its manifest is bitwise identical") {
    const auto a = fresh("evolve_a");
    const auto b = fresh("evolve_b");
    const auto cfg = write_config("evolve", "n_bands = 8\nn_time = 32\n[evolve]\nn_bands = 6\nsteps_per_period = 128\n");
    REQUIRE(run_cli("evolve --config " + cfg.string() + " --out " + a.string()) == 0);
    REQUIRE(run_cli("--from-manifest " + (a / "manifest.json").string() + " --out " + b.string()) == 0);
    CHECK(slurp(a / "energy_trace.csv") == slurp(b / "energy_trace.csv"));
    CHECK(slurp(a / "energy_trace.csv").size() > 100);
    const json mb = json::parse(slurp(b / "manifest.json"));
    CHECK(mb.at("inputs").contains("manifest"));
}

TEST_CASE("invalid input exits 1 with a typed error") {
    const auto out = fresh("invalid");
    CHECK(run_cli("spectrum --override g=-0.1 --out " + out.string()) == 1);
    CHECK(json::parse(slurp(out / "error.json")).at("error") == "ValidationError");
    const auto out2 = fresh("unknown_key");
    const auto cfg = write_config("unknown", "omega = 1\nwobble = 2\n");
    CHECK(run_cli("spectrum --config " + cfg.string() + " --out " + out2.string()) == 1);
    const json err = json::parse(slurp(out2 / "error.json"));
    CHECK(err.at("error") == "ParseError");
    CHECK(err.at("message").get<std::string>().find("line 2") != std::string::npos);
    CHECK(!fs::exists(out2 / "manifest.json"));
}

TEST_CASE("output directory from the environment") {
    const auto out = fresh("from_env");
    const auto cfg = write_config("small", kSmall);
    CHECK(run_cli("sieve --config " + cfg.string(), "RINGKAM_OUT=" + out.string()) == 0);
    CHECK(fs::exists(out / "manifest.json"));
}
