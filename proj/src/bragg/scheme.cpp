#include "scheme.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

namespace bragg {

namespace {
constexpr int kMaxEngineLevels = 64;
constexpr int kMaxDistinctH = 16;
} // namespace

double PulseSequence::total_duration() const {
    double t = 0.0;
    for (const auto& s : segments)
        if (s.kind == SchemeSegment::Kind::pulse) t += s.pulse.duration();
    return t;
}

std::vector<double> PulseSequence::kick_times() const {
    std::vector<double> out;
    double t = 0.0;
    for (const auto& s : segments) {
        if (s.kind == SchemeSegment::Kind::pulse)
            t += s.pulse.duration();
        else
            out.push_back(t);
    }
    return out;
}

int PulseSequence::n_kicks() const {
    int k = 0;
    for (const auto& s : segments)
        if (s.kind == SchemeSegment::Kind::kick) ++k;
    return k;
}

void PulseSequence::add_pulse(ControlPulse p) {
    SchemeSegment s;
    s.kind = SchemeSegment::Kind::pulse;
    s.pulse = std::move(p);
    segments.push_back(std::move(s));
}

void PulseSequence::add_kick(PhaseKick k) {
    SchemeSegment s;
    s.kind = SchemeSegment::Kind::kick;
    s.kick = k;
    segments.push_back(std::move(s));
}

PulseSequence build_rabi_scheme(double correction, double dt) {
    PulseSequence seq;
    seq.name = "rabi";
    seq.add_pulse(rabi_pulse(RabiKind::half_pi, 0, correction, dt));
    for (int n0 = 1; n0 <= 9; ++n0) seq.add_pulse(rabi_pulse(RabiKind::pi, n0, correction, dt));
    seq.add_kick(PhaseKick{});
    for (int n0 = 9; n0 >= 1; --n0) seq.add_pulse(rabi_pulse(RabiKind::pi, n0, correction, dt));
    seq.add_pulse(rabi_pulse(RabiKind::pi, 0, correction, dt));
    for (int n0 = 1; n0 <= 9; ++n0) seq.add_pulse(rabi_pulse(RabiKind::pi, n0, correction, dt));
    seq.add_kick(PhaseKick{});
    for (int n0 = 9; n0 >= 1; --n0) seq.add_pulse(rabi_pulse(RabiKind::pi, n0, correction, dt));
    seq.add_pulse(rabi_pulse(RabiKind::half_pi, 0, correction, dt));
    return seq;
}

PulseSequence build_rap_scheme(const RapParams& rap, double correction, double dt) {
    RapParams up = rap;
    up.n_start = 2;
    up.n_end = kSchemeSeparation;
    RapParams down = up;
    std::swap(down.n_start, down.n_end);

    PulseSequence seq;
    seq.name = "rap";
    seq.add_pulse(rabi_pulse(RabiKind::half_pi, 0, correction, dt));
    seq.add_pulse(rabi_pulse(RabiKind::pi, 1, correction, dt));
    seq.add_pulse(rap_pulse(up, up.duration(), dt));
    seq.add_kick(PhaseKick{});
    seq.add_pulse(rap_pulse(down, down.duration(), dt));
    seq.add_pulse(rabi_pulse(RabiKind::pi, 1, correction, dt));
    seq.add_pulse(rabi_pulse(RabiKind::pi, 0, correction, dt));
    seq.add_pulse(rabi_pulse(RabiKind::pi, 1, correction, dt));
    seq.add_pulse(rap_pulse(up, up.duration(), dt));
    seq.add_kick(PhaseKick{});
    seq.add_pulse(rap_pulse(down, down.duration(), dt));
    seq.add_pulse(rabi_pulse(RabiKind::pi, 1, correction, dt));
    seq.add_pulse(rabi_pulse(RabiKind::half_pi, 0, correction, dt));
    return seq;
}

PulseSequence build_oct_scheme(const ControlPulse& split, const ControlPulse& swap,
                               const RapParams& rap_template, double dt) {
    if (std::abs(split.dt - swap.dt) > 1e-12 * split.dt)
        throw std::invalid_argument("build_oct_scheme: incompatible pulse grids");
    RapParams up = rap_template;
    up.n_start = 1;
    up.n_end = kSchemeSeparation;
    RapParams down = up;
    std::swap(down.n_start, down.n_end);

    PulseSequence seq;
    seq.name = "oct";
    seq.add_pulse(split);
    seq.add_pulse(rap_pulse(up, up.duration(), dt));
    seq.add_kick(PhaseKick{});
    seq.add_pulse(rap_pulse(down, down.duration(), dt));
    seq.add_pulse(swap);
    seq.add_pulse(rap_pulse(up, up.duration(), dt));
    seq.add_kick(PhaseKick{});
    seq.add_pulse(rap_pulse(down, down.duration(), dt));
    seq.add_pulse(split);
    return seq;
}

SchemeResult run_scheme(const PulseSequence& seq, const LadderParams& params, double phi,
                        const PropagationConfig& config, Trajectory* traj) {
    params.validate();
    params.require_guards(0, kSchemeSeparation);
    StateVector state = StateVector::basis(params, 0);
    std::vector<complexd> amp = std::move(state.amp);
    detail::HopBasis basis;
    detail::LeakStats leak;
    int slot = 0;
    double t0 = 0.0;
    if (traj) {
        traj->times.push_back(0.0);
        std::vector<double>& row = traj->populations.emplace_back(params.n_levels());
        for (int j = 0; j < params.n_levels(); ++j) row[j] = std::norm(amp[j]);
    }
    for (const auto& seg : seq.segments) {
        if (seg.kind == SchemeSegment::Kind::kick) {
            double angle = seg.kick.phi + (slot == 0 ? phi : 0.0);
            amp[params.index_of(seg.kick.level)] *= std::polar(1.0, angle);
            ++slot;
        } else {
            detail::advance_pulse(amp, params, seg.pulse, config, basis, leak, traj, t0);
            t0 += seg.pulse.duration();
        }
    }
    SchemeResult res;
    res.final_state.n_min = params.n_min;
    res.final_state.amp = std::move(amp);
    res.max_guard_population = leak.max_guard;
    res.leakage_flagged = leak.max_guard > config.leakage_tol;
    if (traj) {
        traj->final_state = res.final_state;
        traj->max_guard_population = res.max_guard_population;
        traj->leakage_flagged = res.leakage_flagged;
    }
    return res;
}

double contrast(double p_max, double p_min) {
    double den = p_max + p_min;
    if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (p_max - p_min) / den;
}

// ---------------------------------------------------------------------------
// SchemeEngine

SchemeEngine::SchemeEngine(const PulseSequence& seq, const LadderParams& window) {
    window.validate();
    n_ = window.n_levels();
    if (n_ > kMaxEngineLevels)
        throw std::invalid_argument("SchemeEngine: window too large for the compiled kernel");
    idx0_ = window.index_of(0);
    idx1_ = window.index_of(1);
    n_min_level_ = window.n_min;

    std::vector<double> sdt, sphidot, theta;
    int slot = 0;
    for (const auto& seg : seq.segments) {
        if (seg.kind == SchemeSegment::Kind::kick) {
            window.require_guards(0, seg.kick.level);
            Kick k;
            k.boundary = static_cast<int>(sdt.size());
            k.slot = slot++;
            k.fixed = seg.kick.phi;
            k.level_index = window.index_of(seg.kick.level);
            kicks_.push_back(k);
        } else {
            const ControlPulse& p = seg.pulse;
            for (int i = 0; i < p.n_steps(); ++i) {
                sdt.push_back(p.dt);
                sphidot.push_back(p.phidot[i]);
                double aw = std::abs(p.omega[i]);
                hop_base_.push_back(aw * p.dt);
                theta.push_back(aw > 0.0 ? std::arg(-p.omega[i]) : 0.0);
            }
        }
    }
    n_steps_ = static_cast<int>(sdt.size());
    first_kick_boundary_ = kicks_.empty() ? -1 : kicks_.front().boundary;

    hop_on_.resize(n_steps_);
    for (int i = 0; i < n_steps_; ++i) hop_on_[i] = hop_base_[i] > 0.0;

    tab_.resize(static_cast<size_t>(n_steps_ + 1) * 2 * n_);
    h_id_.resize(n_steps_ + 1);
    for (int j = 0; j <= n_steps_; ++j) {
        double h = 0.0, g = 0.0;
        if (j > 0) {
            h += 0.5 * sdt[j - 1];
            g += 0.5 * sdt[j - 1] * sphidot[j - 1];
        }
        if (j < n_steps_) {
            h += 0.5 * sdt[j];
            g += 0.5 * sdt[j] * sphidot[j];
        }
        auto it = std::find(h_values_.begin(), h_values_.end(), h);
        if (it == h_values_.end()) {
            if (static_cast<int>(h_values_.size()) >= kMaxDistinctH)
                throw std::invalid_argument("SchemeEngine: too many distinct step sizes");
            h_values_.push_back(h);
            h_id_[j] = static_cast<unsigned char>(h_values_.size() - 1);
        } else {
            h_id_[j] = static_cast<unsigned char>(it - h_values_.begin());
        }
        // coupling-phase frame rotation folded into the diagonal: rotate into
        // step j's frame, and undo step j-1's rotation
        double th_in = (j < n_steps_) ? theta[j] : 0.0;
        double th_out = (j > 0) ? theta[j - 1] : 0.0;
        for (int x = 0; x < n_; ++x) {
            double lvl = window.level_at(x);
            double ang = -(lvl * lvl * h + lvl * g) + x * (th_in - th_out);
            tab_[static_cast<size_t>(j) * 2 * n_ + x] = std::polar(1.0, ang);
        }
    }

    basis_.build(n_);
    set_mu(1.0);
}

void SchemeEngine::set_mu(double mu) {
    mu_ = mu;
    for (int i = 0; i < n_steps_; ++i) {
        double a = mu * hop_base_[i];
        complexd* row = &tab_[static_cast<size_t>(i) * 2 * n_ + n_];
        for (int k = 0; k < n_; ++k) row[k] = std::polar(1.0, -a * basis_.eigval[k]);
    }
}

namespace {

inline void cmul_inplace(double& xr, double& xi, double yr, double yi) {
    double tr = xr * yr - xi * yi;
    xi = xr * yi + xi * yr;
    xr = tr;
}

struct EngineView {
    const double* tab;
    const double* v;
    const unsigned char* h_id;
    const unsigned char* hop_on;
    const double* beta_re; // kMaxDistinctH rows of kMaxEngineLevels
    const double* beta_im;
};

// Event-free hot loop over steps [j_lo, j_hi): boundary-diagonal multiply
// followed by the sine-basis hop. The closing boundary j_hi stays with the
// caller. No calls, no branches besides the zero-coupling skip.
template <int NT>
void engine_span(const EngineView& v, int j_lo, int j_hi, bool diag_at_start, int n_dyn,
                 double* __restrict ar, double* __restrict ai, double& max_guard) {
    const int n = NT > 0 ? NT : n_dyn;
    alignas(64) double ur[kMaxEngineLevels];
    alignas(64) double ui[kMaxEngineLevels];
    double guard = max_guard;
    for (int j = j_lo; j < j_hi; ++j) {
        const double* __restrict rec = v.tab + static_cast<size_t>(j) * 4 * n;
        if (j > j_lo || diag_at_start) {
            const double* __restrict brx = v.beta_re + v.h_id[j] * kMaxEngineLevels;
            const double* __restrict bix = v.beta_im + v.h_id[j] * kMaxEngineLevels;
            for (int x = 0; x < n; ++x) {
                double dr = rec[2 * x], di = rec[2 * x + 1];
                double fr = dr * brx[x] - di * bix[x];
                double fi = dr * bix[x] + di * brx[x];
                double tr = ar[x] * fr - ai[x] * fi;
                ai[x] = ar[x] * fi + ai[x] * fr;
                ar[x] = tr;
            }
        }
        if (v.hop_on[j]) {
            const double* __restrict hph = rec + 2 * n;
            for (int k = 0; k < n; ++k) {
                const double* __restrict col = v.v + static_cast<size_t>(k) * n;
                double sr = 0.0, si = 0.0;
                for (int x = 0; x < n; ++x) {
                    sr += col[x] * ar[x];
                    si += col[x] * ai[x];
                }
                ur[k] = sr * hph[2 * k] - si * hph[2 * k + 1];
                ui[k] = sr * hph[2 * k + 1] + si * hph[2 * k];
            }
            for (int x = 0; x < n; ++x) {
                ar[x] = 0.0;
                ai[x] = 0.0;
            }
            for (int k = 0; k < n; ++k) {
                const double* __restrict col = v.v + static_cast<size_t>(k) * n;
                double yr = ur[k], yi = ui[k];
                for (int x = 0; x < n; ++x) {
                    ar[x] += col[x] * yr;
                    ai[x] += col[x] * yi;
                }
            }
        }
        double g = ar[0] * ar[0] + ai[0] * ai[0] + ar[n - 1] * ar[n - 1] + ai[n - 1] * ai[n - 1];
        if (g > guard) guard = g;
    }
    max_guard = guard;
}

} // namespace

SchemeEngine::Outcome SchemeEngine::run_impl(double beta, double phi, Snapshot* save,
                                             const Snapshot* resume,
                                             std::vector<complexd>* final_out) const {
    // fixed-size kernel for the default window so the level loops vectorize
    if (n_ == 19) return run_kernel<19>(beta, phi, save, resume, final_out);
    return run_kernel<0>(beta, phi, save, resume, final_out);
}

template <int NT>
SchemeEngine::Outcome SchemeEngine::run_kernel(double beta, double phi, Snapshot* save,
                                               const Snapshot* resume,
                                               std::vector<complexd>* final_out) const {
    const int n = NT > 0 ? NT : n_;
    alignas(64) double ar[kMaxEngineLevels] = {0};
    alignas(64) double ai[kMaxEngineLevels] = {0};

    // per-run beta phase tables, one row per distinct half-step weight
    alignas(64) double br[kMaxDistinctH * kMaxEngineLevels];
    alignas(64) double bi[kMaxDistinctH * kMaxEngineLevels];
    for (size_t t = 0; t < h_values_.size(); ++t)
        for (int x = 0; x < n; ++x) {
            double ang = -2.0 * beta * h_values_[t] * (n_min_level_ + x);
            br[t * kMaxEngineLevels + x] = std::cos(ang);
            bi[t * kMaxEngineLevels + x] = std::sin(ang);
        }

    EngineView view{reinterpret_cast<const double*>(tab_.data()),
                    basis_.v.data(),
                    h_id_.data(),
                    hop_on_.data(),
                    br,
                    bi};

    double max_guard = 0.0;
    int j_cur = 0;
    size_t kick_cursor = 0;
    bool diag_at_start = true;
    if (resume) {
        for (int x = 0; x < n; ++x) {
            ar[x] = resume->re[x];
            ai[x] = resume->im[x];
        }
        max_guard = resume->max_guard;
        j_cur = first_kick_boundary_;
        while (kick_cursor < kicks_.size() && kicks_[kick_cursor].boundary < j_cur) ++kick_cursor;
        diag_at_start = false;
    } else {
        ar[idx0_] = 1.0;
    }

    auto apply_boundary_diag = [&](int j) {
        const double* rec = view.tab + static_cast<size_t>(j) * 4 * n;
        const double* brx = view.beta_re + h_id_[j] * kMaxEngineLevels;
        const double* bix = view.beta_im + h_id_[j] * kMaxEngineLevels;
        for (int x = 0; x < n; ++x) {
            double fr = rec[2 * x] * brx[x] - rec[2 * x + 1] * bix[x];
            double fi = rec[2 * x] * bix[x] + rec[2 * x + 1] * brx[x];
            cmul_inplace(ar[x], ai[x], fr, fi);
        }
    };

    while (true) {
        int next_event =
            (kick_cursor < kicks_.size()) ? kicks_[kick_cursor].boundary : n_steps_;
        if (resume && j_cur == first_kick_boundary_ && kick_cursor < kicks_.size() &&
            kicks_[kick_cursor].boundary == j_cur) {
            // resumed exactly on the kick boundary; diag already applied
        } else {
            engine_span<NT>(view, j_cur, next_event, diag_at_start, n_, ar, ai, max_guard);
            apply_boundary_diag(next_event);
            diag_at_start = false; // the event boundary's diagonal is done
            j_cur = next_event;
        }
        if (save && j_cur == first_kick_boundary_ && kick_cursor < kicks_.size() &&
            kicks_[kick_cursor].boundary == j_cur) {
            save->re.assign(ar, ar + n);
            save->im.assign(ai, ai + n);
            save->max_guard = max_guard;
        }
        while (kick_cursor < kicks_.size() && kicks_[kick_cursor].boundary == j_cur) {
            const Kick& k = kicks_[kick_cursor];
            double angle = k.fixed + (k.slot == 0 ? phi : 0.0);
            cmul_inplace(ar[k.level_index], ai[k.level_index], std::cos(angle), std::sin(angle));
            ++kick_cursor;
        }
        if (j_cur >= n_steps_ && kick_cursor >= kicks_.size()) break;
        resume = nullptr; // the resume special case applies only once
    }

    Outcome out;
    out.p0 = ar[idx0_] * ar[idx0_] + ai[idx0_] * ai[idx0_];
    out.p1 = ar[idx1_] * ar[idx1_] + ai[idx1_] * ai[idx1_];
    out.max_guard = max_guard;
    if (!std::isfinite(out.p0 + out.p1))
        throw NumericalError("SchemeEngine: non-finite amplitudes");
    if (final_out) {
        final_out->resize(n);
        for (int x = 0; x < n; ++x) (*final_out)[x] = complexd(ar[x], ai[x]);
    }
    return out;
}

SchemeEngine::Outcome SchemeEngine::run(double beta, double phi) const {
    return run_impl(beta, phi, nullptr, nullptr);
}

std::pair<SchemeEngine::Outcome, SchemeEngine::Outcome>
SchemeEngine::run_paired(double beta, double phi_a, double phi_b) const {
    if (first_kick_boundary_ < 0) {
        Outcome o = run_impl(beta, phi_a, nullptr, nullptr);
        return {o, o};
    }
    Snapshot snap;
    Outcome a = run_impl(beta, phi_a, &snap, nullptr);
    Outcome b = run_impl(beta, phi_b, nullptr, &snap);
    return {a, b};
}

StateVector SchemeEngine::run_full(double beta, double phi) const {
    std::vector<complexd> fin;
    run_impl(beta, phi, nullptr, nullptr, &fin);
    StateVector s;
    s.n_min = n_min_level_;
    s.amp = std::move(fin);
    return s;
}
// ---------------------------------------------------------------------------

static FringeResult fringe_common(const PulseSequence& seq, const LadderParams& params,
                                  const std::vector<double>& phis,
                                  const PropagationConfig& config, bool parallel) {
    FringeResult fr;
    size_t m = phis.size();
    fr.phis = phis;
    fr.p0.resize(m);
    fr.p1.resize(m);
    fr.leakage.resize(m);
    std::vector<char> flagged(m, 0);

    if (config.method == StepMethod::exact) {
#pragma omp parallel for schedule(dynamic) if (parallel)
        for (size_t i = 0; i < m; ++i) {
            SchemeResult r = run_scheme(seq, params, phis[i], config);
            fr.p0[i] = r.final_state.population(0);
            fr.p1[i] = r.final_state.population(1);
            fr.leakage[i] = 1.0 - fr.p0[i] - fr.p1[i];
            flagged[i] = r.leakage_flagged;
        }
    } else {
        SchemeEngine engine(seq, params);
        engine.set_mu(params.mu);
#pragma omp parallel for schedule(dynamic) if (parallel)
        for (size_t i = 0; i < m; ++i) {
            SchemeEngine::Outcome o = engine.run(params.beta, phis[i]);
            fr.p0[i] = o.p0;
            fr.p1[i] = o.p1;
            fr.leakage[i] = 1.0 - o.p0 - o.p1;
            flagged[i] = o.max_guard > config.leakage_tol;
        }
    }
    for (char f : flagged) fr.any_leakage_flagged |= (f != 0);
    return fr;
}

FringeResult fringe_scan(const PulseSequence& seq, const LadderParams& params,
                         const std::vector<double>& phis, const PropagationConfig& config) {
    return fringe_common(seq, params, phis, config, true);
}

FringeResult fringe_scan_serial(const PulseSequence& seq, const LadderParams& params,
                                const std::vector<double>& phis,
                                const PropagationConfig& config) {
    return fringe_common(seq, params, phis, config, false);
}

void write_fringe_csv(const FringeResult& fr, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_fringe_csv: cannot open " + path);
    out << "phi,p0,p1,leakage\n";
    char buf[32];
    for (size_t i = 0; i < fr.phis.size(); ++i) {
        auto put = [&](double v, char sep) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << buf << sep;
        };
        put(fr.phis[i], ',');
        put(fr.p0[i], ',');
        put(fr.p1[i], ',');
        std::snprintf(buf, sizeof buf, "%.17g", fr.leakage[i]);
        out << buf << "\n";
    }
}

} // namespace bragg
