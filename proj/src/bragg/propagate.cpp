#include "propagate.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <fstream>

namespace bragg {

namespace detail {

void HopBasis::build(int n_levels) {
    n = n_levels;
    v.assign(static_cast<size_t>(n) * n, 0.0);
    eigval.resize(n);
    double norm = std::sqrt(2.0 / (n + 1));
    for (int k = 0; k < n; ++k) {
        eigval[k] = 2.0 * std::cos((k + 1) * M_PI / (n + 1));
        for (int j = 0; j < n; ++j)
            v[static_cast<size_t>(k) * n + j] =
                norm * std::sin((j + 1.0) * (k + 1.0) * M_PI / (n + 1));
    }
}

namespace {

void apply_vt(const std::vector<double>& v, int n, const complexd* x, complexd* y) {
    for (int k = 0; k < n; ++k) {
        const double* col = v.data() + static_cast<size_t>(k) * n;
        double re = 0.0, im = 0.0;
        for (int j = 0; j < n; ++j) {
            re += col[j] * x[j].real();
            im += col[j] * x[j].imag();
        }
        y[k] = complexd(re, im);
    }
}

void apply_v(const std::vector<double>& v, int n, const complexd* y, complexd* x) {
    for (int j = 0; j < n; ++j) x[j] = complexd(0.0, 0.0);
    for (int k = 0; k < n; ++k) {
        const double* col = v.data() + static_cast<size_t>(k) * n;
        complexd yk = y[k];
        for (int j = 0; j < n; ++j) x[j] += col[j] * yk;
    }
}

void diag_phases(std::vector<complexd>& amp, const LadderParams& p, double phidot, double tau) {
    // e^{-i E_j tau} via the second-difference recurrence of the quadratic
    // spectrum: three transcendentals per call instead of one per level
    int n = p.n_levels();
    double e0 = level_energy(p.level_at(0), p.beta, phidot);
    double e1 = level_energy(p.level_at(1), p.beta, phidot);
    complexd f = std::polar(1.0, -e0 * tau);
    complexd g = std::polar(1.0, -(e1 - e0) * tau);
    complexd h = std::polar(1.0, -2.0 * tau);
    for (int j = 0; j < n; ++j) {
        amp[j] *= f;
        f *= g;
        g *= h;
    }
}

// exp(-i C tau) with C = c S + conj(c) S^T applied via the sine basis
void hop_exp(std::vector<complexd>& amp, const HopBasis& basis, complexd c, double tau,
             std::vector<complexd>& work) {
    double ac = std::abs(c);
    if (ac == 0.0) return;
    int n = basis.n;
    bool real_neg = (c.imag() == 0.0 && c.real() < 0.0);
    bool real_pos = (c.imag() == 0.0 && c.real() > 0.0);
    if (real_neg) {
        for (int j = 1; j < n; j += 2) amp[j] = -amp[j];
    } else if (!real_pos) {
        double theta = std::arg(c);
        complexd w(1.0, 0.0), z = std::polar(1.0, theta);
        for (int j = 0; j < n; ++j) {
            amp[j] *= w;
            w *= z;
        }
    }
    work.resize(n);
    apply_vt(basis.v, n, amp.data(), work.data());
    for (int k = 0; k < n; ++k) work[k] *= std::polar(1.0, -ac * basis.eigval[k] * tau);
    apply_v(basis.v, n, work.data(), amp.data());
    if (real_neg) {
        for (int j = 1; j < n; j += 2) amp[j] = -amp[j];
    } else if (!real_pos) {
        double theta = std::arg(c);
        complexd w(1.0, 0.0), z = std::polar(1.0, -theta);
        for (int j = 0; j < n; ++j) {
            amp[j] *= w;
            w *= z;
        }
    }
}

void strang_step(std::vector<complexd>& amp, const LadderParams& p, const HopBasis& basis,
                 double phidot, complexd coupling, double tau, std::vector<complexd>& work) {
    diag_phases(amp, p, phidot, 0.5 * tau);
    hop_exp(amp, basis, coupling, tau, work);
    diag_phases(amp, p, phidot, 0.5 * tau);
}

// y = H x for the tridiagonal sample
void apply_tridiag(const double* diag, complexd c, const complexd* x, complexd* y, int n) {
    complexd cc = std::conj(c);
    for (int j = 0; j < n; ++j) {
        complexd v = diag[j] * x[j];
        if (j + 1 < n) v += c * x[j + 1];
        if (j > 0) v += cc * x[j - 1];
        y[j] = v;
    }
}

// scaled Taylor expansion of exp(-i H tau); robust fallback for the rare
// steps where the tridiagonal eigensolver does not converge
void taylor_exp(std::vector<complexd>& amp, const double* diag, complexd coupling, double tau) {
    int n = static_cast<int>(amp.size());
    double hnorm = 2.0 * std::abs(coupling);
    for (int j = 0; j < n; ++j) hnorm = std::max(hnorm, std::abs(diag[j]) + 2.0 * std::abs(coupling));
    int s = 0;
    double t2 = tau;
    while (hnorm * std::abs(t2) > 0.25) {
        t2 *= 0.5;
        ++s;
    }
    std::vector<complexd> y(n), term(n), ht(n);
    for (int rep = 0; rep < (1 << s); ++rep) {
        y = amp;
        term = amp;
        for (int m = 1; m <= 40; ++m) {
            apply_tridiag(diag, coupling, term.data(), ht.data(), n);
            complexd f = complexd(0.0, -t2) / static_cast<double>(m);
            double mag = 0.0;
            for (int j = 0; j < n; ++j) {
                term[j] = f * ht[j];
                y[j] += term[j];
                mag = std::max(mag, std::abs(term[j]));
            }
            if (mag < 1e-18) break;
        }
        amp = y;
    }
}

// exp(-i H tau) by eigendecomposition of the phase-transformed real
// symmetric tridiagonal matrix
void exact_exp(std::vector<complexd>& amp, const double* diag, complexd coupling, double tau,
               std::vector<complexd>& work) {
    int n = static_cast<int>(amp.size());
    double ac = std::abs(coupling);
    if (ac == 0.0) {
        for (int j = 0; j < n; ++j) amp[j] *= std::polar(1.0, -diag[j] * tau);
        return;
    }
    double theta = std::arg(coupling);
    Eigen::VectorXd d(n), sub(n - 1);
    for (int j = 0; j < n; ++j) d[j] = diag[j];
    sub.setConstant(ac);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) {
        taylor_exp(amp, diag, coupling, tau);
        return;
    }
    const Eigen::MatrixXd& q = es.eigenvectors();
    const Eigen::VectorXd& lam = es.eigenvalues();

    for (int j = 0; j < n; ++j) amp[j] *= std::polar(1.0, j * theta);
    work.resize(n);
    for (int k = 0; k < n; ++k) {
        complexd s(0.0, 0.0);
        for (int j = 0; j < n; ++j) s += q(j, k) * amp[j];
        work[k] = s * std::polar(1.0, -lam[k] * tau);
    }
    for (int j = 0; j < n; ++j) {
        complexd s(0.0, 0.0);
        for (int k = 0; k < n; ++k) s += q(j, k) * work[k];
        amp[j] = s * std::polar(1.0, -j * theta);
    }
}

constexpr double kYoshidaW1 = 1.3512071919596576340476878089715;
constexpr double kYoshidaW0 = -1.7024143839193152680953756179429;

} // namespace

void step_once(std::vector<complexd>& amp, const LadderParams& params, const HopBasis& basis,
               double phidot, complexd coupling, double tau, StepMethod method,
               std::vector<complexd>& work, std::vector<double>& diag_work) {
    int n = params.n_levels();
    switch (method) {
        case StepMethod::exact:
            diag_work.resize(n);
            for (int j = 0; j < n; ++j)
                diag_work[j] = level_energy(params.level_at(j), params.beta, phidot);
            exact_exp(amp, diag_work.data(), coupling, tau, work);
            break;
        case StepMethod::split2:
            strang_step(amp, params, basis, phidot, coupling, tau, work);
            break;
        case StepMethod::split4:
            strang_step(amp, params, basis, phidot, coupling, kYoshidaW1 * tau, work);
            strang_step(amp, params, basis, phidot, coupling, kYoshidaW0 * tau, work);
            strang_step(amp, params, basis, phidot, coupling, kYoshidaW1 * tau, work);
            break;
    }
}

void advance_pulse(std::vector<complexd>& amp, const LadderParams& params,
                   const ControlPulse& pulse, const PropagationConfig& config,
                   HopBasis& basis, LeakStats& leak, Trajectory* sink, double t0) {
    int n = params.n_levels();
    if (basis.n != n && config.method != StepMethod::exact) basis.build(n);
    std::vector<complexd> work;
    std::vector<double> diag(n);
    int n_steps = pulse.n_steps();
    double tau = pulse.dt;
    for (int i = 0; i < n_steps; ++i) {
        complexd c = -params.mu * pulse.omega[i];
        double pd = pulse.phidot[i];
        step_once(amp, params, basis, pd, c, tau, config.method, work, diag);
        double guard = std::norm(amp[0]) + std::norm(amp[n - 1]);
        if (guard > leak.max_guard) leak.max_guard = guard;
        if (sink && ((i + 1) % config.trajectory_stride == 0 || i + 1 == n_steps)) {
            sink->times.push_back(t0 + (i + 1) * tau);
            std::vector<double>& row = sink->populations.emplace_back(n);
            for (int j = 0; j < n; ++j) row[j] = std::norm(amp[j]);
        }
    }
    double nr = 0.0;
    for (const auto& a : amp) nr += std::norm(a);
    if (!std::isfinite(nr)) throw NumericalError("propagate: non-finite amplitudes");
}

} // namespace detail

StateVector step(const StateVector& state, const HamiltonianSample& h, double dt) {
    int n = static_cast<int>(h.diag.size());
    if (n != state.size()) throw std::invalid_argument("step: dimension mismatch");
    StateVector out = state;
    std::vector<complexd> work;
    detail::exact_exp(out.amp, h.diag.data(), h.coupling, dt, work);
    for (const auto& a : out.amp)
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
            throw NumericalError("step: non-finite amplitudes");
    return out;
}

Trajectory propagate(const StateVector& init, const LadderParams& params,
                     const ControlPulse& pulse, const PropagationConfig& config) {
    params.validate();
    Trajectory traj;
    std::vector<complexd> amp = init.amp;
    detail::HopBasis basis;
    detail::LeakStats leak;
    if (config.store_trajectory) {
        traj.times.push_back(0.0);
        std::vector<double>& row = traj.populations.emplace_back(params.n_levels());
        for (int j = 0; j < params.n_levels(); ++j) row[j] = std::norm(amp[j]);
    }
    detail::advance_pulse(amp, params, pulse, config,
                          basis, leak, config.store_trajectory ? &traj : nullptr, 0.0);
    traj.final_state.n_min = params.n_min;
    traj.final_state.amp = std::move(amp);
    traj.max_guard_population = leak.max_guard;
    traj.leakage_flagged = leak.max_guard > config.leakage_tol;
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, const LadderParams& params,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
    out << "t";
    for (int n = params.n_min; n <= params.n_max; ++n) out << ",P_" << n;
    out << "\n";
    char buf[32];
    for (size_t r = 0; r < traj.times.size(); ++r) {
        std::snprintf(buf, sizeof buf, "%.17g", traj.times[r]);
        out << buf;
        for (double p : traj.populations[r]) {
            std::snprintf(buf, sizeof buf, "%.17g", p);
            out << "," << buf;
        }
        out << "\n";
    }
}

} // namespace bragg
