#include "ladder.hpp"

#include "pulse.hpp"

namespace bragg {

HamiltonianSample sample_hamiltonian(const LadderParams& params, const ControlPulse& pulse,
                                     double t) {
    params.validate();
    double pd = pulse.phidot_at(t);
    HamiltonianSample h;
    h.diag.resize(params.n_levels());
    for (int idx = 0; idx < params.n_levels(); ++idx)
        h.diag[idx] = level_energy(params.level_at(idx), params.beta, pd);
    h.coupling = -params.mu * pulse.omega_at(t);
    return h;
}

} // namespace bragg
