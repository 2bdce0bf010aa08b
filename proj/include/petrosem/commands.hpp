#pragma once

#include <cstdint>
#include <string>

#include "petrosem/semigroup.hpp"

namespace petrosem {

/// Process exit codes shared by the commands and the C API.
enum ExitCode : int {
    kExitCorrect = 0,
    kExitError = 1,
    kExitIncorrect = 2,
    kExitInconclusive = 3,
};

struct RunConfig {
    std::string op_path;
    std::string out_dir = ".";
    int grid_N = 64;
    double grid_L = 6.283185307179586476925286766559;  // 2 pi
    double t = 1.0;
    double dt = 0.05;
    NormSpace space = NormSpace::Hinf;
    int j = 0;
    int budget = 10000;
    double r_max = 1000.0;
    double omega1 = 1.0;
    std::uint64_t seed = 1;
    bool force = false;
};

/// Each command writes its artifacts under config.out_dir and returns an
/// exit code (0 correct / 2 incorrect / 3 inconclusive / 1 error). The
/// RNG seed is recorded in every output header.
int cmd_analyze(const OperatorSpec& op, const RunConfig& config);
int cmd_evolve(const OperatorSpec& op, const RunConfig& config);
int cmd_expcheck(const OperatorSpec& op, const RunConfig& config);
int cmd_certify(const OperatorSpec& op, const RunConfig& config);

}  // namespace petrosem
