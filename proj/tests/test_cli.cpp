#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epred/cli.hpp"

#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("epred_test_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Run run(const std::string& args, const std::string& env = "") {
    const fs::path dir = scratch("io");
    const std::string cmd = env + " \"" + std::string(EPRED_CLI_PATH) + "\" " + args + " > \"" +
                            (dir / "out").string() + "\" 2> \"" + (dir / "err").string() + "\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(dir / "out");
    r.err = slurp(dir / "err");
    return r;
}

fs::path write_config(const std::string& name, const json& j) {
    const fs::path p = scratch("cfg") / (name + ".json");
    std::ofstream(p) << j.dump(2);
    return p;
}

json zero_config() {
    return json::parse(R"({
      "grid": {"dim": 1, "sizes": [16], "spacing": [0.0625]},
      "group": "SO3",
      "lagrangian": "spin_glass",
      "init": {"nu": {"profile": "zero"}},
      "gamma0": {"profile": "zero"},
      "time": {"dt": 0.01, "steps": 10},
      "output": {"cadence": 1}
    })");
}

json wave_config(int dim, int n) {
    json j = zero_config();
    j["grid"] = {{"dim", dim}, {"sizes", std::vector<int>(dim, n)}, {"spacing", std::vector<double>(dim, 1.0 / n)}};
    j["init"]["nu"] = {{"profile", "fourier"}, {"modes", 2}, {"amplitude", 1.0}, {"seed", 42}};
    j["gamma0"] = {{"profile", "fourier"}, {"modes", 2}, {"amplitude", 0.5}, {"seed", 43}};
    j["time"] = {{"dt", 0.25 / n}, {"steps", 12}};
    return j;
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header) {
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    if (header) *header = line;
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string l;
    while (std::getline(ss, l)) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("simulate: zero data gives 11 rows of zeros and all artifacts") {
    const fs::path out = scratch("zero");
    const Run r = run("simulate \"" + write_config("zero", zero_config()).string() + "\" \"" + out.string() + "\"");
    REQUIRE(r.code == 0);
    std::string header;
    const auto rows = read_csv(out / "series.csv", &header);
    CHECK(header == epred::cli::kSeriesHeader);
    REQUIRE(rows.size() == 11);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 7);
        CHECK(rows[i][0] == doctest::Approx(0.01 * i));
        for (int c = 1; c < 7; ++c) CHECK(std::abs(rows[i][c]) <= 1e-13);
    }
    for (int step = 0; step <= 10; ++step) CHECK(fs::exists(out / ("state_" + std::to_string(step) + ".json")));
    const json report = json::parse(slurp(out / "report.json"));
    CHECK(report["status"] == "ok");
    CHECK(report["exit_status"] == 0);
    CHECK(report["rows"].size() == 11);
    CHECK(report["config"]["time"]["steps"] == 10);
    const json snap = json::parse(slurp(out / "state_10.json"));
    CHECK(snap["header"]["kind"] == "reduced_state");
    CHECK(snap["nu"].size() == 16 * 3);
}

TEST_CASE("simulate: bad configs exit 2 and name the key") {
    struct Case {
        std::string key;
        std::function<void(json&)> edit;
    };
    const std::vector<Case> cases{
        {"grid.sizes", [](json& j) { j["grid"].erase("sizes"); }},
        {"grid.sizes", [](json& j) { j["grid"]["sizes"] = {3}; }},
        {"grid.dim", [](json& j) { j["grid"]["dim"] = 3; }},
        {"grid.spacing", [](json& j) { j["grid"]["spacing"] = {-1.0}; }},
        {"time.dt", [](json& j) { j["time"]["dt"] = 0.0; }},
        {"time.dt", [](json& j) { j["time"]["dt"] = "fast"; }},
        {"time.steps", [](json& j) { j["time"].erase("steps"); }},
        {"output.cadence", [](json& j) { j["output"]["cadence"] = 0; }},
        {"init.nu.profile", [](json& j) { j["init"]["nu"]["profile"] = "spiral"; }},
        {"gamma0.modes", [](json& j) { j["gamma0"] = {{"profile", "pure_gauge"}, {"modes", 9}}; }},
        {"group", [](json& j) { j["group"] = "E8"; }},
        {"lagrangian", [](json& j) { j["lagrangian"] = "nope"; }},
    };
    for (const auto& c : cases) {
        CAPTURE(c.key);
        json j = zero_config();
        c.edit(j);
        const Run r = run("simulate \"" + write_config("bad", j).string() + "\" \"" + scratch("bad").string() + "\"");
        CHECK(r.code == 2);
        CHECK(r.err.find(c.key) != std::string::npos);
    }
    CHECK(run("simulate /nonexistent/cfg.json " + scratch("x").string()).code == 2);
    CHECK(run("frobnicate").code == 2);
}

TEST_CASE("simulate: divergence exits 3 and keeps the partial series") {
    json j = zero_config();
    j["grid"] = {{"dim", 1}, {"sizes", {64}}, {"spacing", {1.0 / 64}}};
    j["init"]["nu"] = {{"profile", "fourier"}, {"modes", 1}, {"amplitude", 0.1}, {"seed", 1}};
    j["time"] = {{"dt", 0.09}, {"steps", 200}};
    const fs::path out = scratch("div");
    const Run r = run("simulate \"" + write_config("div", j).string() + "\" \"" + out.string() + "\"");
    CHECK(r.code == 3);
    const json report = json::parse(slurp(out / "report.json"));
    CHECK(report["status"] == "diverged");
    CHECK(report["diverged_at_step"].get<int>() > 0);
    CHECK(fs::exists(out / "series.csv"));
}

TEST_CASE("simulate: series.csv is byte-identical across runs and thread counts") {
    const fs::path cfg = write_config("repro", wave_config(2, 48));
    const fs::path a = scratch("ra"), b = scratch("rb"), c = scratch("rc");
    REQUIRE(run("simulate \"" + cfg.string() + "\" \"" + a.string() + "\"", "EPRED_THREADS=1").code == 0);
    REQUIRE(run("simulate \"" + cfg.string() + "\" \"" + b.string() + "\"", "EPRED_THREADS=1").code == 0);
    REQUIRE(run("simulate \"" + cfg.string() + "\" \"" + c.string() + "\"", "EPRED_THREADS=4").code == 0);
    const std::string sa = slurp(a / "series.csv");
    CHECK(sa.size() > 100);
    CHECK(sa == slurp(b / "series.csv"));
    CHECK(sa == slurp(c / "series.csv"));
}

TEST_CASE("simulate: energy column drift at the reference resolution") {
    json j = wave_config(1, 32);
    j["time"] = {{"dt", 1e-3}, {"steps", 1000}};
    j["output"]["cadence"] = 100;
    const fs::path out = scratch("energy");
    REQUIRE(run("simulate \"" + write_config("energy", j).string() + "\" \"" + out.string() + "\"").code == 0);
    const auto rows = read_csv(out / "series.csv", nullptr);
    REQUIRE(rows.size() == 11);
    CHECK(rows.back()[0] == doctest::Approx(1.0));
    CHECK(std::abs(rows.back()[2] - rows.front()[2]) / rows.front()[2] <= 1e-6);
}

TEST_CASE("verify: one line per property; only local gauge invariance fails") {
    const Run r = run("verify");
    const auto ls = lines(r.out);
    CHECK(ls.size() > 20);
    int local_fail = 0;
    for (const auto& l : ls) {
        CAPTURE(l);
        const bool pass = l.rfind("PASS ", 0) == 0, fail = l.rfind("FAIL ", 0) == 0;
        CHECK((pass || fail));
        CHECK(l.find("measured=") != std::string::npos);
        CHECK(l.find("bound=") != std::string::npos);
        if (l.find("gauge_invariance.local") != std::string::npos) {
            CHECK(fail);
            ++local_fail;
        } else {
            CHECK(pass);
        }
    }
    CHECK(local_fail == 2);
    CHECK(r.code == 1);
}

TEST_CASE("verify: minimal N=4 grid") {
    const Run r = run("verify --seed 7 --sizes 4");
    for (const auto& l : lines(r.out)) {
        CAPTURE(l);
        if (l.find("gauge_invariance.local") == std::string::npos) CHECK(l.rfind("PASS ", 0) == 0);
    }
    CHECK(run("verify --sizes 3").code == 2);
}

TEST_CASE("verify: sign-flipped dl/dgamma is caught") {
    const Run r = run("verify --mutate-flip-dgamma");
    CHECK(r.code == 1);
    for (const auto& l : lines(r.out)) {
        if (l.find("fd_match.dl_dgamma") != std::string::npos) CHECK(l.rfind("FAIL ", 0) == 0);
        if (l.find("fd_match.dl_dnu") != std::string::npos) CHECK(l.rfind("PASS ", 0) == 0);
    }
}

TEST_CASE("convergence: 1-D ladder passes and writes orders.json") {
    json j = wave_config(1, 16);
    j["time"] = {{"dt", 0.015625}, {"steps", 32}};
    j["convergence"] = {{"sizes", {16, 32, 64}}, {"probes", 0}, {"seed", 3}};
    const fs::path out = scratch("conv");
    const Run r = run("convergence \"" + write_config("conv", j).string() + "\" \"" + out.string() + "\"");
    CHECK(r.code == 0);
    const json orders = json::parse(slurp(out / "orders.json"));
    CHECK(orders["passed"] == true);
    CHECK(orders["levels"].size() == 3);
    for (const char* m : {"variational_residual", "covariant_residual", "exact_advect_gap"}) {
        CAPTURE(m);
        CHECK(orders["orders"][m].get<double>() >= 1.7);
    }
    CHECK(orders["orders"]["curvature_max"].is_null());
}

TEST_CASE("convergence: short ladders and bad metric names exit 2") {
    json j = wave_config(1, 16);
    j["convergence"] = {{"sizes", {16, 32}}};
    CHECK(run("convergence \"" + write_config("short", j).string() + "\" " + scratch("s").string()).code == 2);
    j["convergence"] = {{"sizes", {16, 32, 64}}, {"metrics", {"speed"}}};
    CHECK(run("convergence \"" + write_config("metric", j).string() + "\" " + scratch("s").string()).code == 2);
    j.erase("convergence");
    CHECK(run("convergence \"" + write_config("none", j).string() + "\" " + scratch("s").string()).code == 2);
}

TEST_CASE("fit_order recovers known slopes") {
    const std::vector<double> h{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> v;
    for (double x : h) v.push_back(3.0 * x * x);
    CHECK(epred::cli::fit_order(h, v) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS(epred::cli::fit_order({0.1}, {1.0}));
    CHECK_THROWS(epred::cli::fit_order({0.1, 0.05}, {1.0, 0.0}));
}

TEST_CASE("format_series round-trips doubles") {
    epred::cli::SeriesRow r;
    r.t = 0.1;
    r.l_value = 1.0 / 3.0;
    r.energy = 2.0 / 7.0;
    const std::string s = epred::cli::format_series({r});
    const auto ls = lines(s);
    REQUIRE(ls.size() == 2);
    std::stringstream ss(ls[1]);
    std::string cell;
    std::getline(ss, cell, ',');
    CHECK(std::stod(cell) == 0.1);
    std::getline(ss, cell, ',');
    CHECK(std::stod(cell) == 1.0 / 3.0);
    std::getline(ss, cell, ',');
    CHECK(std::stod(cell) == 2.0 / 7.0);
}
