#pragma once

#include <string>
#include <vector>

#include "ladder.hpp"
#include "propagate.hpp"
#include "pulse.hpp"

namespace bragg {

// Instantaneous phase kick on one momentum level, emulating the differential
// phase of free flight at maximum separation.
struct PhaseKick {
    int level = kSchemeSeparation;
    double phi = 0.0; // fixed offset; the scan phase is added at run time
};

struct SchemeSegment {
    enum class Kind { pulse, kick };
    Kind kind = Kind::pulse;
    ControlPulse pulse;
    PhaseKick kick;
};

struct PulseSequence {
    std::string name; // rabi | rap | oct | custom
    std::vector<SchemeSegment> segments;

    double total_duration() const;
    std::vector<double> kick_times() const; // start times of the kick slots
    int n_kicks() const;

    void add_pulse(ControlPulse p);
    void add_kick(PhaseKick k);
};

// Full pi/2 - pi pulse train: split, amplify to |10>, kick slot, de-amplify,
// swap, re-amplify, kick slot, de-amplify, recombine.
PulseSequence build_rabi_scheme(double correction = kRabiCorrection, double dt = 0.01);

// pi/2 and pi pulses for splitting and the central swap, with chirped
// amplify/de-amplify passes between |2> and |10>; kick slots at the apexes.
PulseSequence build_rap_scheme(const RapParams& rap = RapParams{},
                               double correction = kRabiCorrection, double dt = 0.01);

// Optimized split/swap pulses combined with |1> <-> |10> chirped transfers.
// The recombination reuses the split pulse.
PulseSequence build_oct_scheme(const ControlPulse& split, const ControlPulse& swap,
                               const RapParams& rap_template = RapParams{},
                               double dt = 0.01);

struct SchemeResult {
    StateVector final_state;
    double max_guard_population = 0.0;
    bool leakage_flagged = false;
};

// Propagates |0> through every segment; the differential phase phi is applied
// entirely at the first kick slot (later slots get their fixed offsets only).
// Populations along the way land in *traj when given.
SchemeResult run_scheme(const PulseSequence& seq, const LadderParams& params, double phi,
                        const PropagationConfig& config = {}, Trajectory* traj = nullptr);

struct FringeResult {
    std::vector<double> phis;
    std::vector<double> p0;
    std::vector<double> p1;
    std::vector<double> leakage; // population outside {|0>, |1>} at final time
    bool any_leakage_flagged = false;
};

FringeResult fringe_scan(const PulseSequence& seq, const LadderParams& params,
                         const std::vector<double>& phis, const PropagationConfig& config = {});
FringeResult fringe_scan_serial(const PulseSequence& seq, const LadderParams& params,
                                const std::vector<double>& phis,
                                const PropagationConfig& config = {});

void write_fringe_csv(const FringeResult& fr, const std::string& path);

// (p_max - p_min) / (p_max + p_min); NaN when both are zero.
double contrast(double p_max, double p_min);

// Compiled form of a PulseSequence for the Strang-split kernel. Phase tables
// that do not depend on (mu, beta) are precomputed once; the hopping-band
// tables are rebuilt per mu. Runs for many (beta, phi) samples then share all
// per-step transcendentals.
class SchemeEngine {
public:
    SchemeEngine(const PulseSequence& seq, const LadderParams& window);

    void set_mu(double mu);
    double mu() const { return mu_; }

    struct Outcome {
        double p0 = 0.0;
        double p1 = 0.0;
        double max_guard = 0.0;
    };

    // phi applied at the first kick slot
    Outcome run(double beta, double phi) const;

    // Two runs sharing the propagation prefix up to the first kick slot.
    std::pair<Outcome, Outcome> run_paired(double beta, double phi_a, double phi_b) const;

    StateVector run_full(double beta, double phi) const;

private:
    struct Kick {
        int boundary = 0;
        int slot = 0;
        double fixed = 0.0;
        int level_index = 0;
    };
    struct Snapshot {
        std::vector<double> re, im;
        double max_guard = 0.0;
    };
    Outcome run_impl(double beta, double phi, Snapshot* save, const Snapshot* resume,
                     std::vector<complexd>* final_out = nullptr) const;

    template <int NT>
    Outcome run_kernel(double beta, double phi, Snapshot* save, const Snapshot* resume,
                       std::vector<complexd>* final_out) const;

    int n_ = 0;
    int n_steps_ = 0;
    int idx0_ = 0, idx1_ = 0;
    int n_min_level_ = 0;
    int first_kick_boundary_ = -1;
    double mu_ = 1.0;
    std::vector<double> hop_base_;       // |omega_i| * dt_i
    // per step j: n diagonal-boundary phases followed by n hop phases. The
    // diagonal part absorbs the coupling-phase rotations exp(i x theta_j) so
    // the hop kernel is a plain sine-basis transform; it is (mu, beta)-
    // independent, while set_mu refreshes the hop half. One contiguous
    // record per step keeps the walk prefetchable.
    std::vector<complexd> tab_;          // (n_steps+1) x 2n
    std::vector<unsigned char> h_id_;    // per boundary: index into h_values_
    std::vector<unsigned char> hop_on_;  // per step: nonzero coupling
    std::vector<double> h_values_;       // distinct half-step weights
    std::vector<Kick> kicks_;
    detail::HopBasis basis_;
};

} // namespace bragg
