#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ladder.hpp"
#include "pulse.hpp"

namespace bragg {

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class StepMethod {
    exact,  // per-step tridiagonal eigendecomposition; serial reference
    split2, // Strang splitting, diagonal phases + sine-transformed hopping band
    split4, // Yoshida triple-jump composition of split2
};

struct PropagationConfig {
    double dt = 0.01;          // base step, units 1/omega_k
    double leakage_tol = 1e-6; // max total population in the outermost guard levels
    bool store_trajectory = false;
    int trajectory_stride = 1;
    StepMethod method = StepMethod::exact;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> populations; // one row per recorded time
    StateVector final_state;
    double max_guard_population = 0.0;
    bool leakage_flagged = false;
};

// exp(-i H dt) |state> by exact eigendecomposition of the Hermitian
// tridiagonal sample; norm preserved to machine precision.
StateVector step(const StateVector& state, const HamiltonianSample& h, double dt);

// Propagates over the full pulse grid with midpoint-sampled controls.
// Leakage above tolerance is flagged in the result, not fatal.
Trajectory propagate(const StateVector& init, const LadderParams& params,
                     const ControlPulse& pulse, const PropagationConfig& config);

void write_trajectory_csv(const Trajectory& traj, const LadderParams& params,
                          const std::string& path);

namespace detail {

// Sine eigenbasis of the unit hopping band S + S^T for an N-level window:
// eigenvalues 2 cos(k pi / (N+1)), eigenvectors sqrt(2/(N+1)) sin(j k pi / (N+1)).
struct HopBasis {
    int n = 0;
    std::vector<double> v;      // column-major N x N
    std::vector<double> eigval; // 2 cos(...)
    void build(int n_levels);
};

struct LeakStats {
    double max_guard = 0.0;
};

// One in-place step under midpoint-sampled controls; negative tau applies
// the adjoint (exact inverse) step. Used by the Krotov sweeps.
void step_once(std::vector<complexd>& amp, const LadderParams& params, const HopBasis& basis,
               double phidot, complexd coupling, double tau, StepMethod method,
               std::vector<complexd>& work, std::vector<double>& diag_work);

// In-place advance of raw amplitudes over one pulse; shared by the public
// propagate() and the scheme runner.
void advance_pulse(std::vector<complexd>& amp, const LadderParams& params,
                   const ControlPulse& pulse, const PropagationConfig& config,
                   HopBasis& basis, LeakStats& leak, Trajectory* sink, double t0);

} // namespace detail

} // namespace bragg
