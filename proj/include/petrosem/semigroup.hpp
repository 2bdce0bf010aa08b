#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "petrosem/matfun.hpp"
#include "petrosem/operator_spec.hpp"

namespace petrosem {

/// Periodic grid: N points per axis (power of two), period L per axis.
/// Mode index j in [0, N) on each axis maps to k_eff = j < N/2 ? j : j-N
/// and frequency xi = 2 pi k_eff / L.
class Grid {
  public:
    Grid(int n, int N, double L);

    int n() const { return n_; }
    int N() const { return N_; }
    double L() const { return L_; }
    long long points() const { return points_; }

    /// Frequency vector of the flat mode index (row-major over axes).
    RealVector frequency(long long mode) const;
    /// Per-axis effective integer mode numbers of a flat index.
    std::vector<int> mode_numbers(long long mode) const;
    /// Flat index from per-axis effective mode numbers.
    long long mode_index(const std::vector<int>& k_eff) const;
    /// Spatial point of a flat index.
    RealVector point(long long idx) const;

    bool operator==(const Grid& o) const {
        return n_ == o.n_ && N_ == o.N_ && L_ == o.L_;
    }

  private:
    int n_, N_;
    double L_;
    long long points_;
};

Grid make_grid(int n, int N, double L);

/// Field of C^m values over a grid. values is m x points; the Fourier
/// kernel is e^{+i<x,xi>} with the (2pi)^n constant folded into the
/// analysis direction, so coefficients(state) * synthesis is exactly the
/// identity round-trip.
struct GridState {
    std::shared_ptr<const Grid> grid;
    ComplexMatrix values;  // m rows, grid->points() columns

    int m() const { return static_cast<int>(values.rows()); }
};

GridState zero_state(std::shared_ptr<const Grid> grid, int m);

/// Mode coefficients, same layout as GridState::values (m x points,
/// column = flat mode index).
ComplexMatrix to_modes(const GridState& state);
GridState from_modes(std::shared_ptr<const Grid> grid, const ComplexMatrix& coeffs);

/// Cached per-mode propagators e^{dt P~(xi_k)}, stored for the shifted
/// symbol P~ - omega I with the common factor e^{omega dt} carried in
/// omega_shift.
struct PropagatorTable {
    std::shared_ptr<const Grid> grid;
    double dt = 0.0;
    double omega_shift = 0.0;  // omega * dt, omega = max(0, grid abscissa)
    std::vector<ComplexMatrix> mode_matrices;
};

/// Builds the table; omega0_hint, when non-negative, overrides the
/// grid-restricted abscissa estimate used for the overflow shift.
PropagatorTable build_propagator(const OperatorSpec& op, std::shared_ptr<const Grid> grid,
                                 double dt, double omega0_hint = -1.0);

/// Applies the table `steps` times: transform, per-mode multiply, inverse.
GridState evolve(const GridState& state, const PropagatorTable& table, int steps);

/// Spectral application of P(d/dx): mode coefficients multiplied by P~(xi_k).
GridState generator_apply(const OperatorSpec& op, const GridState& state);

struct PlaneWave {
    std::vector<int> mode;  // per-axis effective mode numbers
    ComplexVector amplitude;
};

GridState plane_wave_state(std::shared_ptr<const Grid> grid, const PlaneWave& wave);

/// Evolves the discretized plane wave and returns the sup-norm error
/// against chi_xi (x) (e^{tP~(xi)} z), relative to ||e^{tP~(xi)} z||.
double plane_wave_exact(const OperatorSpec& op, const PlaneWave& wave, double t,
                        std::shared_ptr<const Grid> grid);

enum class NormSpace { Cb, Hinf, Ppow };

/// Cb: max over grid points and |alpha| <= j of the derivative field.
/// Hinf: root-sum-square of discrete L2 norms of derivatives |alpha| <= j.
/// Ppow: sum over k <= j of L2 norms of iterated generator applications.
/// Derivatives are spectral; j beyond the resolved band is rejected.
double sobolev_norm(const GridState& state, NormSpace space, int j,
                    const OperatorSpec* op = nullptr);

/// Random band-limited state (modes with any |k_eff| >= N/4 zeroed),
/// normalized to unit discrete L2 norm.
GridState random_band_limited(std::shared_ptr<const Grid> grid, int m,
                              std::uint64_t seed);

/// Max over trials of the fitted slope of log ||S_t u||_j over [T/2, T].
double estimate_omega_E(const OperatorSpec& op, std::shared_ptr<const Grid> grid,
                        NormSpace space, int j, double T, int trials,
                        double omega0_hint = -1.0, std::uint64_t seed = 1);

struct LossOfDerivatives {
    int shift = 0;
    double sup = 0.0;
    bool saturated = false;  // even the max shift failed to stay bounded
};

/// Smallest integer s with sup_t e^{-(omega0+1/2)t} ||S_t u||_j / ||u||_{j+s}
/// bounded across one grid-refinement doubling.
LossOfDerivatives check_loss_of_derivatives(const OperatorSpec& op,
                                            std::shared_ptr<const Grid> grid,
                                            NormSpace space, int j,
                                            const std::vector<double>& t_grid,
                                            double omega0,
                                            std::uint64_t seed = 1);

}  // namespace petrosem
