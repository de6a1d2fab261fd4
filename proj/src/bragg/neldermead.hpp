#pragma once

#include <functional>
#include <vector>

namespace bragg {

struct NelderMeadOptions {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    double tolerance = 1e-4;     // simplex diameter in scaled coordinates
    int max_evaluations = 2000;
    double initial_step = 0.05;  // relative size of the starting simplex
};

struct NelderMeadResult {
    std::vector<double> best;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
    std::vector<double> best_history; // best value after each accepted update
};

// Downhill simplex minimization; returns best-so-far with converged=false
// when the evaluation budget runs out first.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0,
                             const NelderMeadOptions& opts = {});

} // namespace bragg
