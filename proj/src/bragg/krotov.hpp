#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ladder.hpp"
#include "propagate.hpp"
#include "pulse.hpp"

namespace bragg {

struct EnsemblePoint {
    double mu = 1.0;
    double beta = 0.0;
};

// Gaussian ensemble around (mu = 1, beta = 0), drawn once and partitioned
// into batches that the optimizer cycles through.
struct EnsembleSpec {
    int n_points = 1024;
    int batch_size = 16;
    int n_batches = 64;
    double sigma_mu = 0.025;
    double sigma_beta = 0.025;
    double center_mu = 1.0;
    double center_beta = 0.0;
    uint64_t seed = 20240902;

    void validate() const;
};

std::vector<std::vector<EnsemblePoint>> sample_ensemble(const EnsembleSpec& spec);

// Optimization functionals. The population target ignores relative phases
// (they cancel in the assembled interferometer); the gate functional is the
// global-phase-insensitive square-modulus overlap on the {|0>, |1>} subspace.
struct Functional {
    enum class Kind { population, gate };
    Kind kind = Kind::population;
    std::vector<double> target_pops; // population kind, indexed over the window
    StateVector gate_t0, gate_t1;    // gate kind targets for inputs |0>, |1>

    static Functional population_transfer(const LadderParams& window, int target_level);
    // |0> -> (|0> + i|1>)/sqrt(2), |1> -> (i|0> + |1>)/sqrt(2)
    static Functional split_gate(const LadderParams& window);
    // |0> -> |1>, |1> -> |0> up to a global phase
    static Functional swap_gate(const LadderParams& window);
};

// J_pop = 1 - 1/2 || P(psi) - P_tgt ||^2; the optimizer minimizes 1 - J_pop.
double evaluate_jpop(const StateVector& psi, const std::vector<double>& target_pops);

// F = | (  <t0|f0> + <t1|f1> ) / 2 |^2
double evaluate_gate(const StateVector& f0, const StateVector& f1, const Functional& gate);

struct ControlConstraints {
    double omega_max = 1.5;      // amplitude bound, units omega_k
    double spectral_width = 10.0; // total width; low-pass at +/- width/2
    double lambda_a = 0.0;        // Krotov step weight; 0 = auto-scale
    double update_ramp = 0.1;     // update-shape flank fraction of the duration
    bool apply_clip = true;
    bool apply_filter = true;
};

struct IterationStat {
    int cycle = 0;
    int batch = 0;
    int iteration = 0;      // global index
    double j_before = 0.0;  // batch-averaged infidelity with the incoming pulse
    double j_after = 0.0;   // after the Krotov sweep, before constraint projection
    double max_update = 0.0;
};

struct OptimizationRecord {
    std::vector<IterationStat> iterations;
    bool converged = false;
    std::string stop_reason;
    double lambda_a = 0.0;
    double wall_time_s = 0.0;

    void write_csv(const std::string& path) const;
};

// Problem definition: initial states are |0> for a population transfer from
// the ground level, or {|0>, |1>} for gate functionals.
struct KrotovTask {
    LadderParams window;
    ControlPulse guess;
    Functional functional;
    std::vector<int> initial_levels;
    StepMethod method = StepMethod::split2;

    static KrotovTask split(const LadderParams& window = {}, double dt = 0.01);
    static KrotovTask swap(const LadderParams& window = {}, double dt = 0.01);
    static KrotovTask amplify(const LadderParams& window = {}, const RapParams& rap = RapParams{},
                              double dt = 0.01);   // |1> -> |10>
    static KrotovTask deamplify(const LadderParams& window = {},
                                const RapParams& rap = RapParams{}, double dt = 0.01);
};

// Batch-averaged infidelity (1 - J_pop or 1 - F) of a pulse over ensemble points.
double ensemble_infidelity(const KrotovTask& task, const ControlPulse& pulse,
                           const std::vector<EnsemblePoint>& points);

// One Krotov iteration over a batch: backward co-state propagation with the
// current pulse, then the sequential forward update; constraints (amplitude
// clip, then spectral low-pass) applied after the sweep. Throws
// NumericalError when the pre-projection functional increases, which signals
// that lambda_a is too small.
ControlPulse krotov_iterate(const ControlPulse& pulse, const std::vector<EnsemblePoint>& batch,
                            const KrotovTask& task, const ControlConstraints& constraints,
                            IterationStat* stat = nullptr);

struct KrotovOptions {
    int iters_per_batch = 1000;
    int max_cycles = 16;
    double rel_improvement_threshold = 1e-3; // per batch block
};

std::pair<ControlPulse, OptimizationRecord> optimize(const KrotovTask& task,
                                                     const EnsembleSpec& spec,
                                                     const ControlConstraints& constraints,
                                                     const KrotovOptions& options);

// Raw first-order update field (lambda_a = 1, no constraints) evaluated with
// the unmodified forward states; used for gradient cross-checks.
struct UpdateField {
    std::vector<double> re, im;
};
UpdateField krotov_update_field(const ControlPulse& pulse,
                                const std::vector<EnsemblePoint>& batch, const KrotovTask& task);

} // namespace bragg
