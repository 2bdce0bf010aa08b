// petrosem: analyze constant-coefficient matrix PDE operators, evolve
// periodic initial data, cross-check exponential formulas, and build
// per-frequency weight certificates. Links only the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "petrosem.h"

int main(int argc, char** argv) {
    CLI::App app{std::string("petrosem ") + ps_version() +
                 " - Petrov-style well-posedness analysis for constant-"
                 "coefficient operators"};

    std::string op_path, cmd, out_dir = ".", grid = "64,6.283185307179586";
    std::string space = "hinf";
    ps_run_opts opts;
    ps_run_opts_default(&opts);
    double t = opts.t, dt = opts.dt, rmax = opts.r_max, omega1 = opts.omega1;
    double L = 6.283185307179586;
    int N = 64, j = 0, budget = opts.budget;
    std::uint64_t seed = 1;
    bool force = false;

    app.add_option("--op", op_path, "operator JSON file")->required();
    app.add_option("--cmd", cmd, "command: analyze | evolve | expcheck | certify")
        ->required()
        ->check(CLI::IsMember({"analyze", "evolve", "expcheck", "certify"}));
    app.add_option("--grid", grid, "grid as N,L (points per axis, period)");
    app.add_option("--t", t, "evolution horizon");
    app.add_option("--dt", dt, "time step");
    app.add_option("--space", space, "norm space: cb | hinf | ppow")
        ->check(CLI::IsMember({"cb", "hinf", "ppow"}));
    app.add_option("--j", j, "norm order");
    app.add_option("--budget", budget, "sampling budget");
    app.add_option("--rmax", rmax, "max frequency radius");
    app.add_option("--omega1", omega1, "certificate exponent");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--force", force, "evolve even when the operator is not correct");

    CLI11_PARSE(app, argc, argv);

    if (std::sscanf(grid.c_str(), "%d,%lf", &N, &L) != 2) {
        std::fprintf(stderr, "petrosem: --grid expects N,L\n");
        return PS_ERROR;
    }

    ps_operator* op = nullptr;
    if (ps_operator_load_file(op_path.c_str(), &op) != PS_OK) {
        std::fprintf(stderr, "petrosem: %s\n", ps_last_error());
        return PS_ERROR;
    }

    opts.out_dir = out_dir.c_str();
    opts.grid_N = N;
    opts.grid_L = L;
    opts.t = t;
    opts.dt = dt;
    opts.space = space == "cb" ? PS_SPACE_CB
                               : (space == "ppow" ? PS_SPACE_PPOW : PS_SPACE_HINF);
    opts.j = j;
    opts.budget = budget;
    opts.r_max = rmax;
    opts.omega1 = omega1;
    opts.seed = seed;
    opts.force = force ? 1 : 0;

    int code;
    if (cmd == "analyze")
        code = ps_analyze(op, &opts);
    else if (cmd == "evolve")
        code = ps_evolve(op, &opts);
    else if (cmd == "expcheck")
        code = ps_expcheck(op, &opts);
    else
        code = ps_certify(op, &opts);

    if (code == PS_ERROR) std::fprintf(stderr, "petrosem: %s\n", ps_last_error());
    ps_operator_free(op);
    return code;
}
