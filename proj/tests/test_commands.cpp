#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "petrosem/commands.hpp"
#include "petrosem/operator_io.hpp"

using namespace petrosem;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) {
    return std::string(PETROSEM_FIXTURE_DIR) + "/" + name;
}

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("petrosem_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig base_config(const fs::path& out) {
    RunConfig cfg;
    cfg.out_dir = out.string();
    cfg.budget = 2000;
    cfg.r_max = 1e3;
    cfg.seed = 11;
    return cfg;
}

}  // namespace

TEST_CASE("analyze writes the report and returns verdict exit codes") {
    auto out = temp_dir("analyze");
    auto cfg = base_config(out);

    SUBCASE("heat: exit 0, report fields") {
        int rc = cmd_analyze(load_operator_file(fixture("heat.json")), cfg);
        CHECK(rc == kExitCorrect);
        auto rep = nlohmann::json::parse(slurp(out / "report.json"));
        CHECK(rep["verdict"] == "correct");
        CHECK(rep["k0"] == 5);
        CHECK(rep["seed"] == 11);
        CHECK(std::abs(rep["omega0_estimate"].get<double>()) < 1e-9);
        CHECK(rep["unbounded"] == false);

        std::string csv = slurp(out / "lambda_samples.csv");
        CHECK(csv.rfind("# petrosem 0.1.0 seed=11\nr,lambda\n", 0) == 0);
    }
    SUBCASE("backward heat: exit 2") {
        CHECK(cmd_analyze(load_operator_file(fixture("backward_heat.json")), cfg) ==
              kExitIncorrect);
        auto rep = nlohmann::json::parse(slurp(out / "report.json"));
        CHECK(rep["verdict"] == "incorrect");
        CHECK(rep["unbounded"] == true);
        CHECK(rep["fit"]["alpha"].get<double>() == doctest::Approx(2.0));
        CHECK(rep["fit"]["snapped"] == true);
    }
    SUBCASE("outputs are byte-for-byte deterministic") {
        auto out2 = temp_dir("analyze2");
        auto cfg2 = base_config(out2);
        cmd_analyze(load_operator_file(fixture("wave_system.json")), cfg);
        cmd_analyze(load_operator_file(fixture("wave_system.json")), cfg2);
        CHECK(slurp(out / "report.json") == slurp(out2 / "report.json"));
        CHECK(slurp(out / "lambda_samples.csv") == slurp(out2 / "lambda_samples.csv"));
    }
}

TEST_CASE("evolve gates on the verdict") {
    auto out = temp_dir("evolve");
    auto cfg = base_config(out);
    cfg.t = 0.5;
    cfg.dt = 0.05;
    cfg.grid_N = 32;

    SUBCASE("heat evolves and logs decaying norms") {
        int rc = cmd_evolve(load_operator_file(fixture("heat.json")), cfg);
        CHECK(rc == kExitCorrect);
        std::string csv = slurp(out / "norms.csv");
        CHECK(csv.rfind("# petrosem 0.1.0 seed=11\nt,norm_hinf_j0\n", 0) == 0);
        // norms must be non-increasing for the heat flow
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line);
        std::getline(lines, line);
        double prev = 1e300;
        int rows = 0;
        while (std::getline(lines, line)) {
            auto comma = line.find(',');
            double v = std::stod(line.substr(comma + 1));
            CHECK(v <= prev * (1.0 + 1e-12));
            prev = v;
            ++rows;
        }
        CHECK(rows == 11);  // t = 0 plus 10 steps
        CHECK(fs::exists(out / "final_state.json"));
    }
    SUBCASE("transport conserves the L2 norm") {
        int rc = cmd_evolve(load_operator_file(fixture("transport.json")), cfg);
        CHECK(rc == kExitCorrect);
        std::string csv = slurp(out / "norms.csv");
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line);
        std::getline(lines, line);
        double first = -1.0;
        while (std::getline(lines, line)) {
            double v = std::stod(line.substr(line.find(',') + 1));
            if (first < 0)
                first = v;
            else
                CHECK(v == doctest::Approx(first).epsilon(1e-10));
        }
    }
    SUBCASE("backward heat refused without force") {
        int rc = cmd_evolve(load_operator_file(fixture("backward_heat.json")), cfg);
        CHECK(rc == kExitIncorrect);
        CHECK_FALSE(fs::exists(out / "norms.csv"));
    }
    SUBCASE("force overrides the refusal") {
        cfg.force = true;
        cfg.t = 0.1;
        cfg.dt = 0.05;
        int rc = cmd_evolve(load_operator_file(fixture("backward_heat.json")), cfg);
        CHECK(rc == kExitCorrect);
        CHECK(fs::exists(out / "norms.csv"));
    }
}

TEST_CASE("expcheck validates every accuracy column") {
    auto out = temp_dir("expcheck");
    auto cfg = base_config(out);
    int rc = cmd_expcheck(load_operator_file(fixture("wave_system.json")), cfg);
    CHECK(rc == kExitCorrect);
    std::string csv = slurp(out / "expcheck.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "# petrosem 0.1.0 seed=11");
    std::getline(lines, line);
    CHECK(line == "xi,t,newton_rel_err,contour_rel_err,gs_log_margin,decomp_residual");
    int rows = 0;
    while (std::getline(lines, line)) {
        std::istringstream f(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(f, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 6);
        CHECK(std::stod(cells[2]) <= 1e-8);
        CHECK(std::stod(cells[3]) <= 1e-8);
        CHECK(std::stod(cells[4]) >= -1e-12);
        CHECK(std::stod(cells[5]) <= 1e-8);
        ++rows;
    }
    CHECK(rows > 10);
}

TEST_CASE("certify emits per-frequency certificates") {
    auto out = temp_dir("certify");
    auto cfg = base_config(out);

    SUBCASE("feasible rate on the wave system") {
        cfg.omega1 = 0.8;
        int rc = cmd_certify(load_operator_file(fixture("wave_system.json")), cfg);
        CHECK(rc == kExitCorrect);
        std::string csv = slurp(out / "certify.csv");
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line);
        std::getline(lines, line);
        CHECK(line == "xi,omega1,feasible,min_eig_residual,lyapunov_residual,slope");
        while (std::getline(lines, line)) {
            std::istringstream f(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(f, cell, ',')) cells.push_back(cell);
            REQUIRE(cells.size() == 6);
            CHECK(cells[2] == "1");
            CHECK(std::stod(cells[5]) <= 0.8 + 1e-9);
        }
    }
    SUBCASE("infeasible rate is reported and exits 2") {
        cfg.omega1 = 0.1;
        int rc = cmd_certify(load_operator_file(fixture("reaction_diffusion.json")), cfg);
        CHECK(rc == kExitIncorrect);
        std::string csv = slurp(out / "certify.csv");
        CHECK(csv.find(",0,") != std::string::npos);  // some infeasible row
    }
}
