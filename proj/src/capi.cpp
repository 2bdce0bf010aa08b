#include "petrosem.h"

#include <cstring>
#include <string>

#include "petrosem/commands.hpp"
#include "petrosem/operator_io.hpp"

struct ps_operator {
    petrosem::OperatorSpec spec;
};

namespace {

thread_local std::string g_last_error;

void set_error(const char* what) { g_last_error = what ? what : "unknown error"; }

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        set_error(e.what());
        return PS_ERROR;
    } catch (...) {
        set_error("unknown error");
        return PS_ERROR;
    }
}

petrosem::RunConfig to_config(const ps_run_opts* opts) {
    petrosem::RunConfig cfg;
    if (!opts) return cfg;
    if (opts->out_dir) cfg.out_dir = opts->out_dir;
    cfg.grid_N = opts->grid_N;
    cfg.grid_L = opts->grid_L;
    cfg.t = opts->t;
    cfg.dt = opts->dt;
    switch (opts->space) {
        case PS_SPACE_CB: cfg.space = petrosem::NormSpace::Cb; break;
        case PS_SPACE_PPOW: cfg.space = petrosem::NormSpace::Ppow; break;
        default: cfg.space = petrosem::NormSpace::Hinf; break;
    }
    cfg.j = opts->j;
    cfg.budget = opts->budget;
    cfg.r_max = opts->r_max;
    cfg.omega1 = opts->omega1;
    cfg.seed = opts->seed;
    cfg.force = opts->force != 0;
    return cfg;
}

}  // namespace

extern "C" {

const char* ps_version(void) { return "0.1.0"; }

const char* ps_last_error(void) { return g_last_error.c_str(); }

int ps_operator_load_file(const char* path, ps_operator** out) {
    if (!path || !out) {
        set_error("null argument");
        return PS_ERROR;
    }
    return guarded([&] {
        *out = new ps_operator{petrosem::load_operator_file(path)};
        return PS_OK;
    });
}

int ps_operator_load_json(const char* text, ps_operator** out) {
    if (!text || !out) {
        set_error("null argument");
        return PS_ERROR;
    }
    return guarded([&] {
        *out = new ps_operator{petrosem::parse_operator_json(text)};
        return PS_OK;
    });
}

void ps_operator_free(ps_operator* op) { delete op; }

int ps_operator_dims(const ps_operator* op, int* m, int* n, int* d) {
    if (!op) {
        set_error("null operator handle");
        return PS_ERROR;
    }
    if (m) *m = op->spec.m();
    if (n) *n = op->spec.n();
    if (d) *d = op->spec.d();
    return PS_OK;
}

void ps_run_opts_default(ps_run_opts* opts) {
    if (!opts) return;
    petrosem::RunConfig cfg;
    std::memset(opts, 0, sizeof *opts);
    opts->out_dir = nullptr;
    opts->grid_N = cfg.grid_N;
    opts->grid_L = cfg.grid_L;
    opts->t = cfg.t;
    opts->dt = cfg.dt;
    opts->space = PS_SPACE_HINF;
    opts->j = cfg.j;
    opts->budget = cfg.budget;
    opts->r_max = cfg.r_max;
    opts->omega1 = cfg.omega1;
    opts->seed = cfg.seed;
    opts->force = 0;
}

int ps_analyze(const ps_operator* op, const ps_run_opts* opts) {
    if (!op) {
        set_error("null operator handle");
        return PS_ERROR;
    }
    return guarded([&] { return petrosem::cmd_analyze(op->spec, to_config(opts)); });
}

int ps_evolve(const ps_operator* op, const ps_run_opts* opts) {
    if (!op) {
        set_error("null operator handle");
        return PS_ERROR;
    }
    return guarded([&] { return petrosem::cmd_evolve(op->spec, to_config(opts)); });
}

int ps_expcheck(const ps_operator* op, const ps_run_opts* opts) {
    if (!op) {
        set_error("null operator handle");
        return PS_ERROR;
    }
    return guarded([&] { return petrosem::cmd_expcheck(op->spec, to_config(opts)); });
}

int ps_certify(const ps_operator* op, const ps_run_opts* opts) {
    if (!op) {
        set_error("null operator handle");
        return PS_ERROR;
    }
    return guarded([&] { return petrosem::cmd_certify(op->spec, to_config(opts)); });
}

}  // extern "C"
