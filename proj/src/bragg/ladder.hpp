#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace bragg {

using complexd = std::complex<double>;

// Momentum-ladder model in dimensionless units: hbar = 1, energies in units
// of the two-photon recoil frequency omega_k, time in 1/omega_k. Level |n>
// carries momentum p0 + n * 2 hbar k.
struct LadderParams {
    int n_min = -4;
    int n_max = 14;
    double mu = 1.0;   // pulse amplitude scaling factor
    double beta = 0.0; // initial momentum p0 / 2 hbar k

    int n_levels() const { return n_max - n_min + 1; }
    int index_of(int n) const { return n - n_min; }
    int level_at(int idx) const { return n_min + idx; }

    void validate() const {
        if (n_min >= n_max) throw std::invalid_argument("LadderParams: n_min must be < n_max");
        if (mu <= 0.0) throw std::invalid_argument("LadderParams: mu must be > 0");
    }

    // The physical subspace of a scheme must sit strictly inside the window
    // with at least two guard levels on each side.
    void require_guards(int phys_lo, int phys_hi) const {
        if (n_min > phys_lo - 2 || n_max < phys_hi + 2)
            throw std::invalid_argument(
                "LadderParams: need >= 2 guard levels around the physical subspace");
    }
};

// Complex amplitudes over levels n in [n_min, n_max].
struct StateVector {
    int n_min = 0;
    std::vector<complexd> amp;

    static StateVector basis(const LadderParams& p, int n) {
        StateVector s;
        s.n_min = p.n_min;
        s.amp.assign(p.n_levels(), complexd(0.0, 0.0));
        s.amp[p.index_of(n)] = 1.0;
        return s;
    }

    int size() const { return static_cast<int>(amp.size()); }

    double population(int n) const { return std::norm(amp[n - n_min]); }

    double norm() const {
        double s = 0.0;
        for (const auto& a : amp) s += std::norm(a);
        return std::sqrt(s);
    }
};

// Hermitian tridiagonal sample H(t): real diagonal plus one complex scalar on
// the |n><n+1| band; the |n+1><n| band is its conjugate.
struct HamiltonianSample {
    std::vector<double> diag; // E_n / (hbar omega_k), indexed from n_min
    complexd coupling;        // applied on |n><n+1|
};

// E_n = n^2 + 2 n beta + n * phidot; the beta^2 term and the common light
// shift are dropped (global phase only).
inline double level_energy(int n, double beta, double phidot) {
    return static_cast<double>(n) * n + 2.0 * n * beta + n * phidot;
}

struct ControlPulse; // pulse.hpp

// Samples H at time t within the pulse grid. coupling = -mu * Omega(t).
HamiltonianSample sample_hamiltonian(const LadderParams& params, const ControlPulse& pulse,
                                     double t);

} // namespace bragg
