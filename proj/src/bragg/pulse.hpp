#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ladder.hpp"

namespace bragg {

// Exact Blackman window on x in [0, 1], zero at both ends, 1 at the center.
inline double blackman(double x) {
    return 0.42 - 0.5 * std::cos(2.0 * M_PI * x) + 0.08 * std::cos(4.0 * M_PI * x);
}
inline constexpr double kBlackmanMean = 0.42; // integral of the window over [0,1]

// Sampled control waveform. omega and phidot hold one value per time step,
// sampled at the interval midpoints t_i = (i + 1/2) * dt; total duration is
// n_steps * dt. Omega is complex only for optimized pulses.
struct ControlPulse {
    double dt = 0.0;
    std::vector<complexd> omega;  // effective amplitude, units of omega_k
    std::vector<double> phidot;   // instantaneous phase derivative, units of omega_k
    std::string label;

    int n_steps() const { return static_cast<int>(omega.size()); }
    double duration() const { return dt * n_steps(); }

    int step_at(double t) const; // throws std::out_of_range if t outside [0, T]
    complexd omega_at(double t) const { return omega[step_at(t)]; }
    double phidot_at(double t) const { return phidot[step_at(t)]; }

    double max_abs_omega() const;
    double area() const; // integral of |Omega| dt
};

// Blackman envelope of duration T scaled to `peak`, constant phidot.
// Sampled at n = round(T / dt) midpoints.
ControlPulse blackman_envelope(double T, double peak, double phidot_value = 0.0,
                               double dt = 0.01);

enum class RabiKind { half_pi, pi };

inline constexpr double kRabiDuration = 15.0;        // t_Rabi in 1/omega_k
inline constexpr double kRabiCorrection = 1.01;      // many-level amplitude correction
inline constexpr int kSchemeSeparation = 10;         // |N> for the full schemes

// Resonant frequency for the n0 <-> n0+1 transition.
inline double rabi_resonance(int n0) { return -(2.0 * n0 + 1.0); }

// Two-level peak amplitude for a Blackman pulse of rotation angle theta
// (pi/2 or pi): the resonant transfer is sin^2(integral of Omega dt), so the
// envelope area is theta / 2.
inline double rabi_peak_amplitude(double theta, double T = kRabiDuration) {
    return theta / (2.0 * kBlackmanMean * T);
}

// Blackman pi/2 or pi pulse resonant on (n0, n0+1), amplitude multiplied by
// `correction` on top of the analytic two-level value.
ControlPulse rabi_pulse(RabiKind kind, int n0, double correction = kRabiCorrection,
                        double dt = 0.01);

// Linearly chirped pulse for rapid adiabatic passage.
struct RapParams {
    double alpha = 0.1;    // chirp rate, units omega_k (sign ignored; direction from endpoints)
    double t_c = 5.927;    // chirp offset
    double t_r = 19.252;   // switch-on/off duration
    double peak = 0.7;     // plateau amplitude
    int n_start = 2;
    int n_end = 10;

    double tau_b() const { return 2.0 / std::abs(alpha); } // crossing interval
    int n_crossings() const { return std::abs(n_end - n_start); }
    // Shortest duration that traverses all crossings with symmetric margins.
    double duration() const { return n_crossings() * tau_b() + 2.0 * t_c; }

    void validate() const;
};

// RAP pulse over [0, T]: half-Blackman rise over [0, t_r], plateau, half-
// Blackman fall over [T - t_r, T]. The chirp is referenced to the lower level
// of the transfer, phidot(t) = -2 n_low - alpha (t - t_c), so that the
// (n_low + m, n_low + m + 1) crossings fall at t = t_c + (2m + 1) / alpha.
// A downward transfer (n_start > n_end) is the time-mirror of the upward one.
ControlPulse rap_pulse(const RapParams& params, double T, double dt = 0.01);
inline ControlPulse rap_pulse(const RapParams& params) {
    return rap_pulse(params, params.duration());
}

// Pulse file round-trip (JSON, exact double round-trip).
void save_pulse_json(const ControlPulse& pulse, const std::string& path);
ControlPulse load_pulse_json(const std::string& path);

} // namespace bragg
