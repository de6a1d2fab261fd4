#include "krotov.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "fft.hpp"
#include "rng.hpp"

namespace bragg {

void EnsembleSpec::validate() const {
    if (n_points != batch_size * n_batches)
        throw std::invalid_argument("EnsembleSpec: n_points must equal batch_size * n_batches");
    if (sigma_mu < 0.0 || sigma_beta < 0.0)
        throw std::invalid_argument("EnsembleSpec: sigmas must be >= 0");
}

std::vector<std::vector<EnsemblePoint>> sample_ensemble(const EnsembleSpec& spec) {
    spec.validate();
    std::vector<std::vector<EnsemblePoint>> batches(spec.n_batches);
    for (int b = 0; b < spec.n_batches; ++b) {
        batches[b].resize(spec.batch_size);
        for (int i = 0; i < spec.batch_size; ++i) {
            SplitMix64 g(mix_seed(spec.seed, static_cast<uint64_t>(b) * spec.batch_size + i));
            EnsemblePoint& pt = batches[b][i];
            pt.mu = spec.center_mu + spec.sigma_mu * g.normal();
            pt.beta = spec.center_beta + spec.sigma_beta * g.normal();
        }
    }
    return batches;
}

Functional Functional::population_transfer(const LadderParams& window, int target_level) {
    Functional f;
    f.kind = Kind::population;
    f.target_pops.assign(window.n_levels(), 0.0);
    f.target_pops[window.index_of(target_level)] = 1.0;
    return f;
}

Functional Functional::split_gate(const LadderParams& window) {
    Functional f;
    f.kind = Kind::gate;
    const double r = 1.0 / std::sqrt(2.0);
    f.gate_t0 = StateVector::basis(window, 0);
    f.gate_t0.amp[window.index_of(0)] = r;
    f.gate_t0.amp[window.index_of(1)] = complexd(0.0, r);
    f.gate_t1 = StateVector::basis(window, 0);
    f.gate_t1.amp[window.index_of(0)] = complexd(0.0, r);
    f.gate_t1.amp[window.index_of(1)] = r;
    return f;
}

Functional Functional::swap_gate(const LadderParams& window) {
    Functional f;
    f.kind = Kind::gate;
    f.gate_t0 = StateVector::basis(window, 1);
    f.gate_t1 = StateVector::basis(window, 0);
    return f;
}

double evaluate_jpop(const StateVector& psi, const std::vector<double>& target_pops) {
    double ss = 0.0;
    for (size_t j = 0; j < target_pops.size(); ++j) {
        double d = std::norm(psi.amp[j]) - target_pops[j];
        ss += d * d;
    }
    return 1.0 - 0.5 * ss;
}

static complexd overlap(const StateVector& a, const StateVector& b) {
    complexd s(0.0, 0.0);
    for (size_t j = 0; j < a.amp.size(); ++j) s += std::conj(a.amp[j]) * b.amp[j];
    return s;
}

double evaluate_gate(const StateVector& f0, const StateVector& f1, const Functional& gate) {
    complexd w = 0.5 * (overlap(gate.gate_t0, f0) + overlap(gate.gate_t1, f1));
    return std::norm(w);
}

KrotovTask KrotovTask::split(const LadderParams& window, double dt) {
    KrotovTask t;
    t.window = window;
    t.guess = rabi_pulse(RabiKind::half_pi, 0, kRabiCorrection, dt);
    t.guess.label = "oct_split";
    t.functional = Functional::split_gate(window);
    t.initial_levels = {0, 1};
    return t;
}

KrotovTask KrotovTask::swap(const LadderParams& window, double dt) {
    KrotovTask t;
    t.window = window;
    t.guess = rabi_pulse(RabiKind::pi, 0, kRabiCorrection, dt);
    t.guess.label = "oct_swap";
    t.functional = Functional::swap_gate(window);
    t.initial_levels = {0, 1};
    return t;
}

KrotovTask KrotovTask::amplify(const LadderParams& window, const RapParams& rap, double dt) {
    KrotovTask t;
    t.window = window;
    RapParams up = rap;
    up.n_start = 1;
    up.n_end = kSchemeSeparation;
    t.guess = rap_pulse(up, up.duration(), dt);
    t.guess.label = "oct_amplify";
    t.functional = Functional::population_transfer(window, kSchemeSeparation);
    t.initial_levels = {1};
    return t;
}

KrotovTask KrotovTask::deamplify(const LadderParams& window, const RapParams& rap, double dt) {
    KrotovTask t;
    t.window = window;
    RapParams down = rap;
    down.n_start = kSchemeSeparation;
    down.n_end = 1;
    t.guess = rap_pulse(down, down.duration(), dt);
    t.guess.label = "oct_deamplify";
    t.functional = Functional::population_transfer(window, 1);
    t.initial_levels = {kSchemeSeparation};
    return t;
}

// ---------------------------------------------------------------------------

namespace {

using detail::HopBasis;

struct MemberState {
    double mu = 1.0;
    double beta = 0.0;
    int state_index = 0; // which initial level within the task
    std::vector<complexd> psi;
    std::vector<complexd> work;
    std::vector<double> diag_work;
};

// per-member infidelity contribution; gate members carry two states
double member_infidelity(const KrotovTask& task, const std::vector<StateVector>& finals) {
    if (task.functional.kind == Functional::Kind::population) {
        return 1.0 - evaluate_jpop(finals[0], task.functional.target_pops);
    }
    return 1.0 - evaluate_gate(finals[0], finals[1], task.functional);
}

std::vector<complexd> costate_terminal(const KrotovTask& task,
                                       const std::vector<std::vector<complexd>>& finals,
                                       int state_index) {
    int n = task.window.n_levels();
    std::vector<complexd> chi(n);
    if (task.functional.kind == Functional::Kind::population) {
        const std::vector<complexd>& psi = finals[0];
        for (int j = 0; j < n; ++j) {
            double diff = std::norm(psi[j]) - task.functional.target_pops[j];
            chi[j] = -diff * psi[j];
        }
    } else {
        const StateVector& t0 = task.functional.gate_t0;
        const StateVector& t1 = task.functional.gate_t1;
        complexd w(0.0, 0.0);
        for (int j = 0; j < n; ++j)
            w += std::conj(t0.amp[j]) * finals[0][j] + std::conj(t1.amp[j]) * finals[1][j];
        w *= 0.5;
        const StateVector& tgt = (state_index == 0) ? t0 : t1;
        for (int j = 0; j < n; ++j) chi[j] = 0.5 * w * tgt.amp[j];
    }
    return chi;
}

double update_shape(double t, double duration, double ramp_fraction) {
    double ramp = ramp_fraction * duration;
    if (t < ramp) return blackman(0.5 * t / ramp);
    if (t > duration - ramp) return blackman(0.5 * (duration - t) / ramp);
    return 1.0;
}

void forward_final(const KrotovTask& task, const ControlPulse& pulse, const EnsemblePoint& pt,
                   int state_index, const HopBasis& basis, std::vector<complexd>& psi) {
    LadderParams params = task.window;
    params.mu = pt.mu;
    params.beta = pt.beta;
    StateVector init = StateVector::basis(params, task.initial_levels[state_index]);
    psi = init.amp;
    std::vector<complexd> work;
    std::vector<double> dwork;
    for (int i = 0; i < pulse.n_steps(); ++i)
        detail::step_once(psi, params, basis, pulse.phidot[i], -params.mu * pulse.omega[i],
                          pulse.dt, task.method, work, dwork);
}

struct SweepScratch {
    // chi[(member, state)][node * n + level]
    std::vector<std::vector<complexd>> chi;
    std::vector<MemberState> members;
    std::vector<double> shape;
    HopBasis basis;
};

void prepare_sweep(const KrotovTask& task, const ControlPulse& pulse,
                   const std::vector<EnsemblePoint>& batch, SweepScratch& s, double& j_before,
                   bool parallel) {
    int n = task.window.n_levels();
    int n_states = static_cast<int>(task.initial_levels.size());
    int n_steps = pulse.n_steps();
    int m = static_cast<int>(batch.size()) * n_states;

    s.basis.build(n);
    s.members.resize(m);
    s.chi.assign(m, {});
    s.shape.resize(n_steps);
    for (int i = 0; i < n_steps; ++i)
        s.shape[i] = update_shape((i + 0.5) * pulse.dt, pulse.duration(), 0.1);

    std::vector<double> member_j(batch.size(), 0.0);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (size_t k = 0; k < batch.size(); ++k) {
        // terminal states for all initial levels of this member
        std::vector<std::vector<complexd>> finals(n_states);
        for (int st = 0; st < n_states; ++st)
            forward_final(task, pulse, batch[k], st, s.basis, finals[st]);

        std::vector<StateVector> fs(n_states);
        for (int st = 0; st < n_states; ++st) {
            fs[st].n_min = task.window.n_min;
            fs[st].amp = finals[st];
        }
        member_j[k] = member_infidelity(task, fs);

        for (int st = 0; st < n_states; ++st) {
            int idx = static_cast<int>(k) * n_states + st;
            MemberState& ms = s.members[idx];
            ms.mu = batch[k].mu;
            ms.beta = batch[k].beta;
            ms.state_index = st;

            // backward co-state propagation, stored at every node
            std::vector<complexd>& chi = s.chi[idx];
            chi.resize(static_cast<size_t>(n_steps + 1) * n);
            std::vector<complexd> c = costate_terminal(task, finals, st);
            std::copy(c.begin(), c.end(), chi.begin() + static_cast<size_t>(n_steps) * n);
            LadderParams params = task.window;
            params.mu = ms.mu;
            params.beta = ms.beta;
            std::vector<complexd> work;
            std::vector<double> dwork;
            for (int i = n_steps - 1; i >= 0; --i) {
                detail::step_once(c, params, s.basis, pulse.phidot[i],
                                  -params.mu * pulse.omega[i], -pulse.dt, task.method, work,
                                  dwork);
                std::copy(c.begin(), c.end(), chi.begin() + static_cast<size_t>(i) * n);
            }

            ms.psi = StateVector::basis(params, task.initial_levels[st]).amp;
        }
    }

    j_before = 0.0;
    for (double j : member_j) j_before += j;
    j_before /= static_cast<double>(batch.size());
}

} // namespace

double ensemble_infidelity(const KrotovTask& task, const ControlPulse& pulse,
                           const std::vector<EnsemblePoint>& points) {
    int n_states = static_cast<int>(task.initial_levels.size());
    HopBasis basis;
    basis.build(task.window.n_levels());
    std::vector<double> js(points.size());
#pragma omp parallel for schedule(dynamic)
    for (size_t k = 0; k < points.size(); ++k) {
        std::vector<StateVector> fs(n_states);
        for (int st = 0; st < n_states; ++st) {
            std::vector<complexd> fin;
            forward_final(task, pulse, points[k], st, basis, fin);
            fs[st].n_min = task.window.n_min;
            fs[st].amp = std::move(fin);
        }
        js[k] = member_infidelity(task, fs);
    }
    double j = 0.0;
    for (double v : js) j += v;
    return j / static_cast<double>(points.size());
}

UpdateField krotov_update_field(const ControlPulse& pulse,
                                const std::vector<EnsemblePoint>& batch,
                                const KrotovTask& task) {
    int n = task.window.n_levels();
    int n_steps = pulse.n_steps();
    SweepScratch s;
    double j_before = 0.0;
    prepare_sweep(task, pulse, batch, s, j_before, true);

    // forward states stored at every node, with the unmodified pulse
    int m = static_cast<int>(s.members.size());
    std::vector<std::vector<complexd>> psi_nodes(m);
#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < m; ++idx) {
        MemberState& ms = s.members[idx];
        LadderParams params = task.window;
        params.mu = ms.mu;
        params.beta = ms.beta;
        std::vector<complexd> psi = ms.psi;
        std::vector<complexd> work;
        std::vector<double> dwork;
        std::vector<complexd>& nodes = psi_nodes[idx];
        nodes.resize(static_cast<size_t>(n_steps + 1) * n);
        std::copy(psi.begin(), psi.end(), nodes.begin());
        for (int i = 0; i < n_steps; ++i) {
            detail::step_once(psi, params, s.basis, pulse.phidot[i],
                              -params.mu * pulse.omega[i], pulse.dt, task.method, work, dwork);
            std::copy(psi.begin(), psi.end(), nodes.begin() + static_cast<size_t>(i + 1) * n);
        }
    }

    int n_members = static_cast<int>(batch.size());
    UpdateField f;
    f.re.assign(n_steps, 0.0);
    f.im.assign(n_steps, 0.0);
    for (int i = 0; i < n_steps; ++i) {
        double du = 0.0, dv = 0.0;
        for (int idx = 0; idx < m; ++idx) {
            const complexd* chi = s.chi[idx].data() + static_cast<size_t>(i) * n;
            const complexd* psi = psi_nodes[idx].data() + static_cast<size_t>(i) * n;
            complexd g(0.0, 0.0), b(0.0, 0.0);
            for (int j = 0; j + 1 < n; ++j) {
                g += std::conj(chi[j]) * psi[j + 1];
                b += std::conj(chi[j + 1]) * psi[j];
            }
            double mu = s.members[idx].mu;
            du += -mu * (g + b).imag();
            dv += -mu * (g - b).real();
        }
        f.re[i] = s.shape[i] * du / n_members;
        f.im[i] = s.shape[i] * dv / n_members;
    }
    return f;
}

ControlPulse krotov_iterate(const ControlPulse& pulse, const std::vector<EnsemblePoint>& batch,
                            const KrotovTask& task, const ControlConstraints& constraints,
                            IterationStat* stat) {
    if (batch.empty()) throw std::invalid_argument("krotov_iterate: empty batch");
    double lambda = constraints.lambda_a;
    if (lambda <= 0.0) throw std::invalid_argument("krotov_iterate: lambda_a must be set");

    int n = task.window.n_levels();
    int n_steps = pulse.n_steps();
    int n_states = static_cast<int>(task.initial_levels.size());
    int n_members = static_cast<int>(batch.size());
    int m = n_members * n_states;

    SweepScratch s;
    double j_before = 0.0;
    prepare_sweep(task, pulse, batch, s, j_before, true);

    ControlPulse updated = pulse;
    double max_update = 0.0;

    // sequential sweep: update the control at each step from the stored
    // co-states and the newly propagated states, then advance the states
    std::vector<double> bsum_im(m), gdiff_re(m);
    for (int i = 0; i < n_steps; ++i) {
        double du = 0.0, dv = 0.0;
#pragma omp parallel for schedule(static)
        for (int idx = 0; idx < m; ++idx) {
            const complexd* chi = s.chi[idx].data() + static_cast<size_t>(i) * n;
            const complexd* psi = s.members[idx].psi.data();
            complexd g(0.0, 0.0), b(0.0, 0.0);
            for (int j = 0; j + 1 < n; ++j) {
                g += std::conj(chi[j]) * psi[j + 1];
                b += std::conj(chi[j + 1]) * psi[j];
            }
            double mu = s.members[idx].mu;
            bsum_im[idx] = -mu * (g + b).imag();
            gdiff_re[idx] = -mu * (g - b).real();
        }
        for (int idx = 0; idx < m; ++idx) {
            du += bsum_im[idx];
            dv += gdiff_re[idx];
        }
        du *= s.shape[i] / (lambda * n_members);
        dv *= s.shape[i] / (lambda * n_members);
        updated.omega[i] += complexd(du, dv);
        max_update = std::max(max_update, std::hypot(du, dv));

#pragma omp parallel for schedule(static)
        for (int idx = 0; idx < m; ++idx) {
            MemberState& ms = s.members[idx];
            LadderParams params = task.window;
            params.mu = ms.mu;
            params.beta = ms.beta;
            detail::step_once(ms.psi, params, s.basis, updated.phidot[i],
                              -params.mu * updated.omega[i], updated.dt, task.method, ms.work,
                              ms.diag_work);
        }
    }

    // batch functional after the sweep, before constraint projection
    double j_after = 0.0;
    for (int k = 0; k < n_members; ++k) {
        std::vector<StateVector> fs(n_states);
        for (int st = 0; st < n_states; ++st) {
            fs[st].n_min = task.window.n_min;
            fs[st].amp = s.members[k * n_states + st].psi;
        }
        j_after += member_infidelity(task, fs);
    }
    j_after /= n_members;

    if (stat) {
        stat->j_before = j_before;
        stat->j_after = j_after;
        stat->max_update = max_update;
    }
    if (j_after > j_before + 1e-10)
        throw NumericalError(
            "krotov_iterate: functional increased before projection; increase lambda_a");

    if (constraints.apply_clip) {
        for (auto& w : updated.omega) {
            double aw = std::abs(w);
            if (aw > constraints.omega_max) w *= constraints.omega_max / aw;
        }
    }
    if (constraints.apply_filter)
        spectral_lowpass(updated.omega, updated.dt, 0.5 * constraints.spectral_width);
    return updated;
}

std::pair<ControlPulse, OptimizationRecord> optimize(const KrotovTask& task,
                                                     const EnsembleSpec& spec,
                                                     const ControlConstraints& constraints,
                                                     const KrotovOptions& options) {
    auto batches = sample_ensemble(spec);
    ControlPulse pulse = task.guess;
    OptimizationRecord rec;
    double t_start = omp_get_wtime();

    ControlConstraints cons = constraints;
    if (cons.lambda_a <= 0.0) {
        UpdateField f = krotov_update_field(pulse, batches[0], task);
        double m = 0.0;
        for (size_t i = 0; i < f.re.size(); ++i) m = std::max(m, std::hypot(f.re[i], f.im[i]));
        cons.lambda_a = (m > 0.0) ? m / (0.05 * cons.omega_max) : 1.0;
    }
    rec.lambda_a = cons.lambda_a;

    int global_iter = 0;
    for (int cycle = 0; cycle < options.max_cycles && !rec.converged; ++cycle) {
        for (size_t b = 0; b < batches.size(); ++b) {
            double block_start = -1.0, block_end = -1.0;
            for (int it = 0; it < options.iters_per_batch; ++it) {
                IterationStat stat;
                stat.cycle = cycle;
                stat.batch = static_cast<int>(b);
                stat.iteration = global_iter++;
                bool ok = false;
                for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
                    try {
                        pulse = krotov_iterate(pulse, batches[b], task, cons, &stat);
                        ok = true;
                    } catch (const NumericalError&) {
                        cons.lambda_a *= 2.0; // step too aggressive for this batch
                        rec.lambda_a = cons.lambda_a;
                    }
                }
                if (!ok) {
                    rec.stop_reason = "lambda_a rescaling failed to restore monotonicity";
                    rec.iterations.push_back(stat);
                    rec.wall_time_s = omp_get_wtime() - t_start;
                    return {pulse, rec};
                }
                rec.iterations.push_back(stat);
                if (block_start < 0.0) block_start = stat.j_before;
                block_end = stat.j_after;
                if (block_end < 1e-8) break; // solved to numerical noise
            }
            double denom = std::max(std::abs(block_start), 1e-12);
            if ((block_start - block_end) / denom < options.rel_improvement_threshold) {
                rec.converged = true;
                rec.stop_reason = "batch block improvement below threshold";
                break;
            }
        }
    }
    if (!rec.converged && rec.stop_reason.empty()) rec.stop_reason = "max cycles reached";
    rec.wall_time_s = omp_get_wtime() - t_start;
    return {pulse, rec};
}

void OptimizationRecord::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("OptimizationRecord: cannot open " + path);
    out << "iteration,cycle,batch,j_before,j_after,max_update\n";
    char buf[32];
    for (const auto& st : iterations) {
        out << st.iteration << "," << st.cycle << "," << st.batch << ",";
        std::snprintf(buf, sizeof buf, "%.17g", st.j_before);
        out << buf << ",";
        std::snprintf(buf, sizeof buf, "%.17g", st.j_after);
        out << buf << ",";
        std::snprintf(buf, sizeof buf, "%.17g", st.max_update);
        out << buf << "\n";
    }
}

} // namespace bragg
