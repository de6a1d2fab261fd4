#include "tuning.hpp"

#include <omp.h>

#include <cmath>
#include <stdexcept>

namespace bragg {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

CalibrationResult calibration_sweep(const std::vector<double>& scales, double dt) {
    CalibrationResult res;
    res.scales = scales;
    res.errors.resize(scales.size());
    LadderParams params;

#pragma omp parallel for schedule(dynamic)
    for (size_t i = 0; i < scales.size(); ++i) {
        PulseSequence seq = build_rabi_scheme(scales[i], dt);
        SchemeEngine engine(seq, params);
        SchemeEngine::Outcome o = engine.run(0.0, 0.0);
        res.errors[i] = 1.0 - o.p0;
    }

    size_t best = 0;
    for (size_t i = 1; i < scales.size(); ++i)
        if (res.errors[i] < res.errors[best]) best = i;
    res.argmin_scale = scales[best];
    res.min_error = res.errors[best];
    if (best > 0 && best + 1 < scales.size()) {
        // parabola through the minimum and its neighbors
        double x0 = scales[best - 1], x1 = scales[best], x2 = scales[best + 1];
        double y0 = res.errors[best - 1], y1 = res.errors[best], y2 = res.errors[best + 1];
        double d = (x0 - x1) * (y1 - y2) - (x1 - x2) * (y0 - y1);
        if (d != 0.0) {
            double num = (x0 * x0 - x1 * x1) * (y1 - y2) - (x1 * x1 - x2 * x2) * (y0 - y1);
            res.argmin_scale = 0.5 * num / d;
        }
    }
    return res;
}

double rap_transfer_fidelity(const RapParams& params, const LadderParams& window,
                             const PropagationConfig& config) {
    StateVector init = StateVector::basis(window, params.n_start);
    ControlPulse pulse = rap_pulse(params, params.duration(), config.dt);
    Trajectory traj = propagate(init, window, pulse, config);
    return traj.final_state.population(params.n_end);
}

RapTuneResult tune_rap(const RapParams& initial, const LadderParams& window,
                       const NelderMeadOptions& opts, const PropagationConfig& config) {
    initial.validate();
    double f0 = rap_transfer_fidelity(initial, window, config);
    if (f0 <= 0.0)
        throw std::invalid_argument("tune_rap: initial guess yields zero transfer");

    auto objective = [&](const std::vector<double>& x) {
        RapParams p = initial;
        p.t_c = x[0];
        p.t_r = x[1];
        p.peak = x[2];
        if (p.t_c <= 0.0 || p.t_r <= 0.0 || p.peak <= 0.0 || p.duration() < 2.0 * p.t_r)
            return 1.0; // outside the feasible region
        return 1.0 - rap_transfer_fidelity(p, window, config);
    };

    NelderMeadResult nm = nelder_mead(objective, {initial.t_c, initial.t_r, initial.peak}, opts);

    RapTuneResult res;
    res.params = initial;
    res.params.t_c = nm.best[0];
    res.params.t_r = nm.best[1];
    res.params.peak = nm.best[2];
    res.fidelity = 1.0 - nm.value;
    res.converged = nm.converged;
    res.evaluations = nm.evaluations;
    res.objective_history = nm.best_history;
    // a descent method must not return something worse than the start
    if (res.fidelity < f0) {
        res.params = initial;
        res.fidelity = f0;
    }
    return res;
}

} // namespace bragg
