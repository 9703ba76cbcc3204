#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string stdout_text;
};

fs::path scratch_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("sweepsim_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args, const fs::path& scratch) {
    const fs::path out_file = scratch / "stdout.txt";
    const std::string cmd =
        std::string(SWEEPSIM_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    result.stdout_text = ss.str();
    return result;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::pair<double, double>> read_csv_1d(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return rows;
}

}  // namespace

TEST_CASE("cli lists the full scenario registry") {
    const auto dir = scratch_dir("list");
    const CliResult r = run_cli("list-scenarios", dir);
    CHECK(r.exit_code == 0);
    for (const char* id : {"example1", "example2", "example2_averaged", "pure_sweep",
                           "interior_ode", "fixed_point_monotone"})
        CHECK(r.stdout_text.find(id) != std::string::npos);
}

TEST_CASE("cli simulate writes a feasible trajectory and metadata") {
    const auto dir = scratch_dir("simulate");
    const CliResult r = run_cli(
        "simulate --scenario example1 --eps 0 --x0 0.5 --t-start 0 --t-end 20 --step 1e-3 "
        "--seed 42 --out " +
            dir.string(),
        dir);
    REQUIRE(r.exit_code == 0);
    const auto rows = read_csv_1d(dir / "trajectory.csv");
    REQUIRE(rows.size() == 20001);
    for (const auto& [t, x] : rows) {
        CHECK(x >= std::sin(t) - 1e-8);
        CHECK(x <= std::sin(t) + 1.0 + 1e-8);
    }
    const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
    CHECK(meta.at("alpha_hat").get<double>() == doctest::Approx(1.0).epsilon(0.05));
    CHECK(meta.at("seed").get<unsigned long long>() == 42);
}

TEST_CASE("cli simulate rejects an infeasible start with exit code 2") {
    const auto dir = scratch_dir("infeasible");
    const CliResult r =
        run_cli("simulate --scenario example1 --x0 5 --out " + dir.string(), dir);
    CHECK(r.exit_code == 2);
}

TEST_CASE("cli rejects unknown scenarios and bad flags with exit code 1") {
    const auto dir = scratch_dir("config");
    CHECK(run_cli("simulate --scenario does_not_exist --out " + dir.string(), dir).exit_code == 1);
    CHECK(run_cli("simulate --scenario example1 --step -1 --out " + dir.string(), dir).exit_code ==
          1);
    CHECK(run_cli("response --scenario example1 --out " + dir.string(), dir).exit_code == 1);
}

TEST_CASE("cli pure sweep rides the lower face exactly") {
    const auto dir = scratch_dir("sweep");
    const CliResult r = run_cli("simulate --scenario pure_sweep --out " + dir.string(), dir);
    REQUIRE(r.exit_code == 0);
    const auto rows = read_csv_1d(dir / "trajectory.csv");
    for (const auto& [t, x] : rows)
        if (t >= 1e-3 - 1e-15) CHECK(std::fabs(x - t) <= 1e-12);
}

TEST_CASE("cli stability run passes the envelope check on the worked example") {
    const auto dir = scratch_dir("stability");
    const CliResult r = run_cli(
        "stability --scenario example1 --eps 0 --t-end 8 --start-a 0 --start-b 1 --alpha 1 "
        "--seed 1 --out " +
            dir.string(),
        dir);
    REQUIRE(r.exit_code == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "stability.json"));
    CHECK(report.at("gronwall_satisfied").get<bool>());
    CHECK(report.at("fitted_rate").get<double>() <= -0.9);
    CHECK(fs::exists(dir / "gap.csv"));
}

TEST_CASE("cli config file values are overridden by flags") {
    const auto dir = scratch_dir("override");
    {
        std::ofstream cfg(dir / "run.json");
        cfg << R"({"scenario": "interior_ode", "t_end": 2.0, "seed": 9})";
    }
    const CliResult r = run_cli(
        "simulate --config " + (dir / "run.json").string() + " --t-end 1 --out " + dir.string(),
        dir);
    REQUIRE(r.exit_code == 0);
    const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
    CHECK(meta.at("t_end").get<double>() == 1.0);   // flag wins
    CHECK(meta.at("seed").get<unsigned long long>() == 9);  // file value kept
}

TEST_CASE("cli runs are bitwise reproducible for a fixed seed") {
    const auto dir_a = scratch_dir("repro_a");
    const auto dir_b = scratch_dir("repro_b");
    const std::string args =
        "simulate --scenario example1 --eps 0.05 --t-end 5 --seed 1234 --out ";
    REQUIRE(run_cli(args + dir_a.string(), dir_a).exit_code == 0);
    REQUIRE(run_cli(args + dir_b.string(), dir_b).exit_code == 0);
    CHECK(slurp(dir_a / "trajectory.csv") == slurp(dir_b / "trajectory.csv"));
    CHECK(slurp(dir_a / "meta.json") == slurp(dir_b / "meta.json"));
}
