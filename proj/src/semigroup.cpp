#include "petrosem/semigroup.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

#include "petrosem/parallel.hpp"

namespace petrosem {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW planning mutates global state; execution of an existing plan is
// thread-safe, planning is not.
std::mutex& fftw_plan_mutex() {
    static std::mutex mu;
    return mu;
}

// In-place n-dimensional transform of one component (length = N^n).
void fft_inplace(std::vector<std::complex<double>>& data, int n, int N, int sign) {
    std::vector<int> dims(n, N);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        plan = fftw_plan_dft(n, dims.data(),
                             reinterpret_cast<fftw_complex*>(data.data()),
                             reinterpret_cast<fftw_complex*>(data.data()), sign,
                             FFTW_ESTIMATE);
    }
    if (!plan) throw NumericalError("fftw: planner failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

// -------------------------------------------------------------- Grid

Grid::Grid(int n, int N, double L) : n_(n), N_(N), L_(L) {
    if (n < 1 || n > 4) throw InputError("Grid: dimension must be in [1, 4]");
    if (!is_power_of_two(N) || N < 4)
        throw InputError("Grid: N must be a power of two, >= 4");
    if (!(L > 0.0)) throw InputError("Grid: period L must be positive");
    points_ = 1;
    for (int i = 0; i < n; ++i) points_ *= N;
}

std::vector<int> Grid::mode_numbers(long long mode) const {
    if (mode < 0 || mode >= points_) throw InputError("Grid: mode index out of range");
    std::vector<int> k(n_);
    for (int ax = n_ - 1; ax >= 0; --ax) {
        int j = int(mode % N_);
        mode /= N_;
        k[ax] = j < N_ / 2 ? j : j - N_;
    }
    return k;
}

long long Grid::mode_index(const std::vector<int>& k_eff) const {
    if (int(k_eff.size()) != n_) throw InputError("Grid: mode vector dimension mismatch");
    long long idx = 0;
    for (int ax = 0; ax < n_; ++ax) {
        int k = k_eff[ax];
        if (k < -N_ / 2 || k >= N_ / 2)
            throw InputError("Grid: mode number outside [-N/2, N/2)");
        int j = k >= 0 ? k : k + N_;
        idx = idx * N_ + j;
    }
    return idx;
}

RealVector Grid::frequency(long long mode) const {
    std::vector<int> k = mode_numbers(mode);
    RealVector xi(n_);
    for (int ax = 0; ax < n_; ++ax) xi(ax) = kTwoPi * k[ax] / L_;
    return xi;
}

RealVector Grid::point(long long idx) const {
    if (idx < 0 || idx >= points_) throw InputError("Grid: point index out of range");
    RealVector x(n_);
    for (int ax = n_ - 1; ax >= 0; --ax) {
        x(ax) = L_ * double(idx % N_) / N_;
        idx /= N_;
    }
    return x;
}

Grid make_grid(int n, int N, double L) { return Grid(n, N, L); }

GridState zero_state(std::shared_ptr<const Grid> grid, int m) {
    if (!grid) throw InputError("zero_state: null grid");
    if (m < 1) throw InputError("zero_state: m must be >= 1");
    return {grid, ComplexMatrix::Zero(m, grid->points())};
}

// ---------------------------------------------------------- transforms

ComplexMatrix to_modes(const GridState& state) {
    if (!state.grid) throw InputError("to_modes: state has no grid");
    const Grid& g = *state.grid;
    ComplexMatrix coeffs(state.m(), g.points());
    for (int c = 0; c < state.m(); ++c) {
        std::vector<std::complex<double>> buf(size_t(g.points()));
        for (long long i = 0; i < g.points(); ++i) buf[size_t(i)] = state.values(c, i);
        // synthesis kernel is e^{+i<x,xi>}, so analysis is the FORWARD
        // transform normalized by the point count
        fft_inplace(buf, g.n(), g.N(), FFTW_FORWARD);
        for (long long i = 0; i < g.points(); ++i)
            coeffs(c, i) = buf[size_t(i)] / double(g.points());
    }
    return coeffs;
}

GridState from_modes(std::shared_ptr<const Grid> grid, const ComplexMatrix& coeffs) {
    if (!grid) throw InputError("from_modes: null grid");
    if (coeffs.cols() != grid->points())
        throw InputError("from_modes: coefficient count does not match the grid");
    GridState state{grid, ComplexMatrix(coeffs.rows(), coeffs.cols())};
    for (int c = 0; c < coeffs.rows(); ++c) {
        std::vector<std::complex<double>> buf(size_t(grid->points()));
        for (long long i = 0; i < grid->points(); ++i) buf[size_t(i)] = coeffs(c, i);
        fft_inplace(buf, grid->n(), grid->N(), FFTW_BACKWARD);
        for (long long i = 0; i < grid->points(); ++i)
            state.values(c, i) = buf[size_t(i)];
    }
    return state;
}

// ---------------------------------------------------------- propagator

PropagatorTable build_propagator(const OperatorSpec& op,
                                 std::shared_ptr<const Grid> grid, double dt,
                                 double omega0_hint) {
    if (!grid) throw InputError("build_propagator: null grid");
    if (grid->n() != op.n())
        throw InputError("build_propagator: grid dimension does not match the operator");
    if (!std::isfinite(dt)) throw InputError("build_propagator: dt must be finite");

    double omega = omega0_hint;
    if (omega < 0.0) {
        // grid-restricted spectral abscissa
        std::vector<double> absc(size_t(grid->points()));
        parallel_for(grid->points(), [&](long long i) {
            absc[size_t(i)] =
                eigenvalues(eval_symbol(op, grid->frequency(i))).abscissa();
        });
        omega = *std::max_element(absc.begin(), absc.end());
    }
    omega = std::max(0.0, omega);

    PropagatorTable table;
    table.grid = grid;
    table.dt = dt;
    table.omega_shift = omega * dt;
    table.mode_matrices.resize(size_t(grid->points()));
    ComplexMatrix I = ComplexMatrix::Identity(op.m(), op.m());
    double omega_copy = omega;
    parallel_for(grid->points(), [&](long long i) {
        ComplexMatrix P = eval_symbol(op, grid->frequency(i)) - omega_copy * I;
        table.mode_matrices[size_t(i)] = exp_reference(P, dt).dense();
    });
    return table;
}

GridState evolve(const GridState& state, const PropagatorTable& table, int steps) {
    if (!state.grid || !table.grid || !(*state.grid == *table.grid))
        throw InputError("evolve: state and propagator grids differ");
    if (steps < 0) throw InputError("evolve: steps must be >= 0");
    if (table.mode_matrices.empty() ||
        int(table.mode_matrices[0].rows()) != state.m())
        throw InputError("evolve: propagator dimension does not match the state");
    ComplexMatrix coeffs = to_modes(state);
    double shift = std::exp(table.omega_shift);
    for (int s = 0; s < steps; ++s) {
        ComplexMatrix next(coeffs.rows(), coeffs.cols());
        parallel_for(coeffs.cols(), [&](long long i) {
            next.col(i) = shift * (table.mode_matrices[size_t(i)] * coeffs.col(i));
        });
        coeffs = std::move(next);
    }
    return from_modes(state.grid, coeffs);
}

GridState generator_apply(const OperatorSpec& op, const GridState& state) {
    if (!state.grid) throw InputError("generator_apply: state has no grid");
    if (state.grid->n() != op.n() || state.m() != op.m())
        throw InputError("generator_apply: operator does not match the state");
    ComplexMatrix coeffs = to_modes(state);
    ComplexMatrix out(coeffs.rows(), coeffs.cols());
    parallel_for(coeffs.cols(), [&](long long i) {
        out.col(i) = eval_symbol(op, state.grid->frequency(i)) * coeffs.col(i);
    });
    return from_modes(state.grid, out);
}

// ---------------------------------------------------------- plane waves

GridState plane_wave_state(std::shared_ptr<const Grid> grid, const PlaneWave& wave) {
    if (!grid) throw InputError("plane_wave_state: null grid");
    long long idx = grid->mode_index(wave.mode);
    ComplexMatrix coeffs = ComplexMatrix::Zero(wave.amplitude.size(), grid->points());
    coeffs.col(idx) = wave.amplitude;
    return from_modes(grid, coeffs);
}

double plane_wave_exact(const OperatorSpec& op, const PlaneWave& wave, double t,
                        std::shared_ptr<const Grid> grid) {
    if (!grid) throw InputError("plane_wave_exact: null grid");
    if (wave.amplitude.size() != op.m())
        throw InputError("plane_wave_exact: amplitude dimension mismatch");
    if (!(t >= 0.0)) throw InputError("plane_wave_exact: t must be >= 0");
    long long idx = grid->mode_index(wave.mode);
    // Evolve the exact single-mode coefficients: every other mode is
    // identically zero and stays zero under the per-mode multiply, so no
    // transform roundoff is amplified by the modes' dynamic range.
    ComplexMatrix coeffs = ComplexMatrix::Zero(wave.amplitude.size(), grid->points());
    coeffs.col(idx) = wave.amplitude;
    if (t > 0.0) {
        int steps = std::max(1, int(std::lround(t / 0.05)));
        PropagatorTable table = build_propagator(op, grid, t / steps);
        double shift = std::exp(table.omega_shift);
        for (int s = 0; s < steps; ++s)
            coeffs.col(idx) = shift * (table.mode_matrices[size_t(idx)] * coeffs.col(idx));
    } else {
        GridState start = plane_wave_state(grid, wave);
        coeffs = to_modes(start);  // transform round-trip
    }
    GridState evolved = from_modes(grid, coeffs);

    RealVector xi = grid->frequency(idx);
    ComplexVector exact_amp =
        exp_reference(eval_symbol(op, xi), t).dense() * wave.amplitude;
    double scale = exact_amp.norm();

    double worst = 0.0;
    for (long long p = 0; p < grid->points(); ++p) {
        RealVector x = grid->point(p);
        Complex phase = std::exp(Complex(0.0, x.dot(xi)));
        double err = (evolved.values.col(p) - phase * exact_amp).norm();
        worst = std::max(worst, err);
    }
    return worst / std::max(scale, 1e-300);
}

// --------------------------------------------------------------- norms

namespace {

// xi^alpha for a frequency vector
double monomial(const RealVector& xi, const MultiIndex& alpha) {
    double v = 1.0;
    for (int i = 0; i < alpha.size(); ++i)
        for (int k = 0; k < alpha[i]; ++k) v *= xi(i);
    return v;
}

void check_band(const Grid& g, int j) {
    if (j < 0) throw InputError("sobolev_norm: order j must be >= 0");
    if (j > g.N() / 2)
        throw InputError(
            "sobolev_norm: derivative order exceeds the resolved band (j > N/2); "
            "refine the grid");
}

}  // namespace

double sobolev_norm(const GridState& state, NormSpace space, int j,
                    const OperatorSpec* op) {
    if (!state.grid) throw InputError("sobolev_norm: state has no grid");
    const Grid& g = *state.grid;
    check_band(g, j);
    double cell = std::pow(g.L() / g.N(), g.n());  // discrete L2 cell volume

    if (space == NormSpace::Ppow) {
        if (!op) throw InputError("sobolev_norm: the P-power norm needs the operator");
        if (op->n() != g.n() || op->m() != state.m())
            throw InputError("sobolev_norm: operator does not match the state");
        ComplexMatrix coeffs = to_modes(state);
        double total = 0.0;
        for (int k = 0; k <= j; ++k) {
            // discrete L2 norm via Parseval: L^n sum |c|^2
            double l2sq = std::pow(g.L(), g.n()) * coeffs.squaredNorm();
            total += std::sqrt(l2sq);
            if (k < j) {
                ComplexMatrix next(coeffs.rows(), coeffs.cols());
                for (long long i = 0; i < g.points(); ++i)
                    next.col(i) = eval_symbol(*op, g.frequency(i)) * coeffs.col(i);
                coeffs = std::move(next);
            }
        }
        return total;
    }

    std::vector<MultiIndex> alphas = multi_indices_up_to(g.n(), j);
    ComplexMatrix coeffs = to_modes(state);

    if (space == NormSpace::Hinf) {
        double total = 0.0;
        for (const auto& alpha : alphas) {
            double l2sq = 0.0;
            for (long long i = 0; i < g.points(); ++i) {
                double w = monomial(g.frequency(i), alpha);
                l2sq += w * w * coeffs.col(i).squaredNorm();
            }
            total += std::pow(g.L(), g.n()) * l2sq;
        }
        return std::sqrt(total);
    }

    // Cb: synthesize each derivative field and take the sup
    double worst = 0.0;
    for (const auto& alpha : alphas) {
        ComplexMatrix dc(coeffs.rows(), coeffs.cols());
        for (long long i = 0; i < g.points(); ++i) {
            // d^alpha of e^{i<x,xi>} brings down (i xi)^alpha
            Complex factor = std::pow(Complex(0.0, 1.0), double(alpha.order())) *
                             monomial(g.frequency(i), alpha);
            dc.col(i) = factor * coeffs.col(i);
        }
        GridState field = from_modes(state.grid, dc);
        for (long long p = 0; p < g.points(); ++p)
            worst = std::max(worst, field.values.col(p).norm());
    }
    (void)cell;
    return worst;
}

GridState random_band_limited(std::shared_ptr<const Grid> grid, int m,
                              std::uint64_t seed) {
    if (!grid) throw InputError("random_band_limited: null grid");
    if (m < 1) throw InputError("random_band_limited: m must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    ComplexMatrix coeffs = ComplexMatrix::Zero(m, grid->points());
    for (long long i = 0; i < grid->points(); ++i) {
        std::vector<int> k = grid->mode_numbers(i);
        bool keep = true;
        for (int v : k)
            if (std::abs(v) >= grid->N() / 4) keep = false;
        if (!keep) continue;
        for (int c = 0; c < m; ++c)
            coeffs(c, i) = Complex(gauss(rng), gauss(rng));
    }
    GridState state = from_modes(grid, coeffs);
    double l2 = std::sqrt(std::pow(grid->L(), grid->n()) * coeffs.squaredNorm());
    if (l2 <= 0.0) throw NumericalError("random_band_limited: degenerate draw");
    state.values /= l2;
    return state;
}

double estimate_omega_E(const OperatorSpec& op, std::shared_ptr<const Grid> grid,
                        NormSpace space, int j, double T, int trials,
                        double omega0_hint, std::uint64_t seed) {
    if (trials < 1) throw InputError("estimate_omega_E: trials must be >= 1");
    if (!(T > 0.0)) throw InputError("estimate_omega_E: T must be positive");
    const int segments = 40;  // sample times over [T/2, T]
    double dt = T / (2.0 * segments);
    PropagatorTable table = build_propagator(op, grid, dt, omega0_hint);
    const OperatorSpec* op_ptr = (space == NormSpace::Ppow) ? &op : nullptr;

    double worst_slope = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < trials; ++trial) {
        GridState u = random_band_limited(grid, op.m(), seed + 7919 * trial);
        GridState current = evolve(u, table, segments);  // reach t = T/2
        std::vector<double> ts, ys;
        for (int s = 0; s <= segments; ++s) {
            double t = T / 2.0 + s * dt;
            double nrm = sobolev_norm(current, space, j, op_ptr);
            if (nrm > 0.0) {
                ts.push_back(t);
                ys.push_back(std::log(nrm));
            }
            if (s < segments) current = evolve(current, table, 1);
        }
        if (ts.size() < 3)
            throw NumericalError("estimate_omega_E: norms vanished along the orbit");
        double mt = 0.0, my = 0.0;
        for (size_t i = 0; i < ts.size(); ++i) {
            mt += ts[i];
            my += ys[i];
        }
        mt /= ts.size();
        my /= ys.size();
        double stt = 0.0, sty = 0.0;
        for (size_t i = 0; i < ts.size(); ++i) {
            stt += (ts[i] - mt) * (ts[i] - mt);
            sty += (ts[i] - mt) * (ys[i] - my);
        }
        worst_slope = std::max(worst_slope, sty / stt);
    }
    return worst_slope;
}

LossOfDerivatives check_loss_of_derivatives(const OperatorSpec& op,
                                            std::shared_ptr<const Grid> grid,
                                            NormSpace space, int j,
                                            const std::vector<double>& t_grid,
                                            double omega0, std::uint64_t seed) {
    if (t_grid.empty()) throw InputError("check_loss_of_derivatives: empty t grid");
    auto fine_grid = std::make_shared<Grid>(grid->n(), grid->N() * 2, grid->L());
    const OperatorSpec* op_ptr = (space == NormSpace::Ppow) ? &op : nullptr;
    int max_shift = std::max(2 * op.m(), (op.m() - 1) * op.d());
    max_shift = std::max(max_shift, 1);
    std::vector<double> times = t_grid;
    std::sort(times.begin(), times.end());

    auto sup_ratio = [&](std::shared_ptr<const Grid> g, int shift) {
        double dt = times.front();
        if (!(dt > 0.0))
            throw InputError("check_loss_of_derivatives: times must be positive");
        for (double t : times)
            if (std::abs(t / dt - std::lround(t / dt)) > 1e-9)
                throw InputError(
                    "check_loss_of_derivatives: t grid must be multiples of its "
                    "smallest entry");
        PropagatorTable table = build_propagator(op, g, dt, omega0);
        double worst = 0.0;
        for (int trial = 0; trial < 3; ++trial) {
            GridState u = random_band_limited(g, op.m(), seed + 101 * trial);
            double denom = sobolev_norm(u, space, j + shift, op_ptr);
            GridState current = u;
            int done = 0;
            for (double t : times) {
                int steps = int(std::lround(t / dt));
                current = evolve(current, table, steps - done);
                done = steps;
                double num = std::exp(-(omega0 + 0.5) * t) *
                             sobolev_norm(current, space, j, op_ptr);
                worst = std::max(worst, num / std::max(denom, 1e-300));
            }
        }
        return worst;
    };

    for (int shift = 0; shift <= max_shift; ++shift) {
        double coarse = sup_ratio(grid, shift);
        double fine = sup_ratio(fine_grid, shift);
        // bounded across refinement: the sup must not keep growing
        if (fine <= 2.0 * coarse + 1e-9) {
            return {shift, std::max(coarse, fine), false};
        }
    }
    return {max_shift, 0.0, true};
}

}  // namespace petrosem
