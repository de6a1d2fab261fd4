#include "pulse.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace bragg {

int ControlPulse::step_at(double t) const {
    if (t < 0.0 || t > duration())
        throw std::out_of_range("ControlPulse: time outside pulse grid");
    int i = static_cast<int>(t / dt);
    return std::min(i, n_steps() - 1);
}

double ControlPulse::max_abs_omega() const {
    double m = 0.0;
    for (const auto& w : omega) m = std::max(m, std::abs(w));
    return m;
}

double ControlPulse::area() const {
    double a = 0.0;
    for (const auto& w : omega) a += std::abs(w);
    return a * dt;
}

static int steps_for(double T, double dt) {
    int n = static_cast<int>(std::lround(T / dt));
    return std::max(n, 1);
}

ControlPulse blackman_envelope(double T, double peak, double phidot_value, double dt) {
    if (T <= 0.0) throw std::invalid_argument("blackman_envelope: T must be > 0");
    int n = steps_for(T, dt);
    ControlPulse p;
    p.dt = T / n;
    p.omega.resize(n);
    p.phidot.assign(n, phidot_value);
    for (int i = 0; i < n; ++i) {
        double t = (i + 0.5) * p.dt;
        p.omega[i] = peak * blackman(t / T);
    }
    return p;
}

ControlPulse rabi_pulse(RabiKind kind, int n0, double correction, double dt) {
    if (correction <= 0.0) throw std::invalid_argument("rabi_pulse: correction must be > 0");
    double theta = (kind == RabiKind::half_pi) ? M_PI / 2.0 : M_PI;
    double peak = rabi_peak_amplitude(theta) * correction;
    ControlPulse p = blackman_envelope(kRabiDuration, peak, rabi_resonance(n0), dt);
    p.label = (kind == RabiKind::half_pi ? "pi2_n" : "pi_n") + std::to_string(n0);
    return p;
}

void RapParams::validate() const {
    if (alpha == 0.0) throw std::invalid_argument("RapParams: alpha must be nonzero");
    if (t_r <= 0.0) throw std::invalid_argument("RapParams: t_r must be > 0");
    if (peak <= 0.0) throw std::invalid_argument("RapParams: peak must be > 0");
    if (n_start == n_end) throw std::invalid_argument("RapParams: trivial transfer");
    if (duration() < 2.0 * t_r) throw std::invalid_argument("RapParams: duration < 2 t_r");
}

ControlPulse rap_pulse(const RapParams& params, double T, double dt) {
    params.validate();
    if (T < 2.0 * params.t_r) throw std::invalid_argument("rap_pulse: T too short");
    double a = std::abs(params.alpha);
    bool up = params.n_end > params.n_start;
    int n_low = std::min(params.n_start, params.n_end);

    int n = steps_for(T, dt);
    ControlPulse p;
    p.dt = T / n;
    p.omega.resize(n);
    p.phidot.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = (i + 0.5) * p.dt;
        double env;
        if (t < params.t_r)
            env = blackman(0.5 * t / params.t_r);
        else if (t > T - params.t_r)
            env = blackman(0.5 * (T - t) / params.t_r);
        else
            env = 1.0;
        p.omega[i] = params.peak * env;
        // downward transfer runs the upward chirp backwards in time
        double tc = up ? t : (T - t);
        p.phidot[i] = -2.0 * n_low - a * (tc - params.t_c);
    }
    p.label = "rap_" + std::to_string(params.n_start) + "_to_" + std::to_string(params.n_end);
    return p;
}

void save_pulse_json(const ControlPulse& pulse, const std::string& path) {
    nlohmann::json j;
    j["dt"] = pulse.dt;
    auto& re = j["omega_re"] = nlohmann::json::array();
    auto& im = j["omega_im"] = nlohmann::json::array();
    for (const auto& w : pulse.omega) {
        re.push_back(w.real());
        im.push_back(w.imag());
    }
    j["phidot"] = pulse.phidot;
    j["meta"] = {{"label", pulse.label}, {"samples", "interval_midpoint"}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_pulse_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

ControlPulse load_pulse_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_pulse_json: cannot open " + path);
    nlohmann::json j;
    in >> j;
    ControlPulse p;
    p.dt = j.at("dt").get<double>();
    auto re = j.at("omega_re").get<std::vector<double>>();
    auto im = j.at("omega_im").get<std::vector<double>>();
    if (re.size() != im.size()) throw std::runtime_error("load_pulse_json: omega size mismatch");
    p.omega.resize(re.size());
    for (size_t i = 0; i < re.size(); ++i) p.omega[i] = complexd(re[i], im[i]);
    p.phidot = j.at("phidot").get<std::vector<double>>();
    if (p.phidot.size() != p.omega.size())
        throw std::runtime_error("load_pulse_json: phidot size mismatch");
    if (j.contains("meta") && j["meta"].contains("label")) p.label = j["meta"]["label"];
    return p;
}

} // namespace bragg
