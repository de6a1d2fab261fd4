#pragma once

#include <vector>

#include "neldermead.hpp"
#include "propagate.hpp"
#include "pulse.hpp"
#include "scheme.hpp"

namespace bragg {

struct CalibrationResult {
    std::vector<double> scales;
    std::vector<double> errors;  // 1 - P0(T) of the full pi/2-pi scheme
    double argmin_scale = 0.0;   // parabolic refinement around the grid minimum
    double min_error = 0.0;
};

// Sweeps the amplitude scale of every pulse in the pi/2-pi train relative to
// the analytic two-level value, at mu = 1, beta = 0, phi = 0.
CalibrationResult calibration_sweep(const std::vector<double>& scales, double dt = 0.01);

std::vector<double> linspace(double lo, double hi, int n);

// Transfer fidelity |<n_end| U |n_start>|^2 of a RAP pulse on the full ladder.
double rap_transfer_fidelity(const RapParams& params, const LadderParams& window,
                             const PropagationConfig& config = {.dt = 0.01,
                                                                .method = StepMethod::split2});

struct RapTuneResult {
    RapParams params;
    double fidelity = 0.0;
    bool converged = false;
    int evaluations = 0;
    std::vector<double> objective_history; // best 1 - fidelity after each accepted update
};

// Nelder-Mead tuning of (t_c, t_r, peak) at fixed chirp rate, minimizing the
// single-transfer infidelity. The pulse duration follows t_c.
RapTuneResult tune_rap(const RapParams& initial, const LadderParams& window,
                       const NelderMeadOptions& opts = {},
                       const PropagationConfig& config = {.dt = 0.01,
                                                          .method = StepMethod::split2});

} // namespace bragg
