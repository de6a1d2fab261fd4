// Timing comparison of the propagation kernels and of the serial reference
// loops against their OpenMP counterparts.

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "bragg/propagate.hpp"
#include "bragg/robustness.hpp"
#include "bragg/scheme.hpp"

using namespace bragg;

static double time_propagate(const LadderParams& win, const ControlPulse& pulse,
                             StepMethod method, double dt, int reps) {
    PropagationConfig cfg;
    cfg.method = method;
    cfg.dt = dt;
    StateVector init = StateVector::basis(win, 2);
    double t0 = omp_get_wtime();
    double accum = 0.0;
    for (int r = 0; r < reps; ++r) {
        Trajectory t = propagate(init, win, pulse, cfg);
        accum += t.final_state.population(10);
    }
    double el = (omp_get_wtime() - t0) / reps;
    std::printf("  %-22s %8.2f ms  (P10=%.4f)\n",
                method == StepMethod::exact    ? "exact eigendecomp"
                : method == StepMethod::split2 ? "strang split"
                                               : "yoshida split",
                el * 1e3, accum / reps);
    return el;
}

int main(int argc, char** argv) {
    int samples = argc > 1 ? std::atoi(argv[1]) : 200;
    LadderParams win;
    RapParams rp;

    std::printf("single chirped-transfer propagation (T=%.1f, dt=0.01):\n", rp.duration());
    ControlPulse pulse = rap_pulse(rp, rp.duration(), 0.01);
    time_propagate(win, pulse, StepMethod::exact, 0.01, 3);
    time_propagate(win, pulse, StepMethod::split2, 0.01, 20);
    time_propagate(win, pulse, StepMethod::split4, 0.01, 10);

    std::printf("\ncompiled scheme kernel (full chirped scheme, dt=0.05):\n");
    PulseSequence seq = build_rap_scheme(rp, kRabiCorrection, 0.05);
    SchemeEngine engine(seq, win);
    engine.set_mu(1.0);
    {
        double t0 = omp_get_wtime();
        double acc = 0.0;
        for (int i = 0; i < samples; ++i) acc += engine.run(1e-3 * i, 0.0).p0;
        double el = (omp_get_wtime() - t0) / samples;
        int steps = static_cast<int>(seq.total_duration() / 0.05);
        std::printf("  %-22s %8.3f ms per run (%.0f ns/step, acc %.3f)\n", "engine run", el * 1e3,
                    el / steps * 1e9, acc / samples);
    }

    std::printf("\nlandscape point, %d paired samples (serial vs OpenMP, %d threads):\n",
                samples, omp_get_max_threads());
    PulseSequence scan_seq = build_rap_scheme(rp, kRabiCorrection, 0.1);
    SchemeEngine scan_engine(scan_seq, win);
    scan_engine.set_mu(1.0);
    double t0 = omp_get_wtime();
    PointStats serial = sample_point(scan_engine, 0.2, samples, 1, 0.0, M_PI, 1e-3, false);
    double t_serial = omp_get_wtime() - t0;
    t0 = omp_get_wtime();
    PointStats parallel = sample_point(scan_engine, 0.2, samples, 1, 0.0, M_PI, 1e-3, true);
    double t_parallel = omp_get_wtime() - t0;
    std::printf("  serial:   %8.1f ms  (p_max_bar=%.6f)\n", t_serial * 1e3, serial.p_max_bar);
    std::printf("  parallel: %8.1f ms  (p_max_bar=%.6f)\n", t_parallel * 1e3, parallel.p_max_bar);
    std::printf("  speedup: %.2fx, results identical: %s\n", t_serial / t_parallel,
                serial.p_max_bar == parallel.p_max_bar && serial.p_min_bar == parallel.p_min_bar
                    ? "yes"
                    : "NO");
    return 0;
}
