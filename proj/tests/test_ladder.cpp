#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bragg/ladder.hpp"
#include "bragg/pulse.hpp"
#include "bragg/rng.hpp"

using namespace bragg;

TEST_CASE("level energies") {
    CHECK(level_energy(0, 0.0, 0.0) == 0.0);
    // resonance shift cancels n^2 for n=1 at the (0,1) drive frequency
    CHECK(level_energy(1, 0.0, -1.0) == 0.0);
    CHECK(level_energy(2, 0.1, 0.0) == doctest::Approx(4.4).epsilon(1e-14));
}

TEST_CASE("resonance condition aligns neighboring levels") {
    SplitMix64 g(11);
    for (int trial = 0; trial < 20; ++trial) {
        int n0 = static_cast<int>(g.next() % 12) - 2;
        double pd = rabi_resonance(n0);
        CHECK(level_energy(n0, 0.0, pd) == doctest::Approx(level_energy(n0 + 1, 0.0, pd))
                                               .epsilon(1e-13));
    }
}

TEST_CASE("hamiltonian sampling") {
    LadderParams p;
    ControlPulse zero = blackman_envelope(10.0, 0.0);

    SUBCASE("zero pulse gives the bare parabola") {
        HamiltonianSample h = sample_hamiltonian(p, zero, 5.0);
        CHECK(h.coupling == complexd(0.0, 0.0));
        for (int n = p.n_min; n <= p.n_max; ++n)
            CHECK(h.diag[p.index_of(n)] == doctest::Approx(n * n));
    }

    SUBCASE("resonant drive with the quoted splitting amplitude") {
        ControlPulse pulse = blackman_envelope(10.0, 0.125, -1.0);
        pulse.omega.assign(pulse.n_steps(), complexd(0.125, 0.0)); // flat for the check
        HamiltonianSample h = sample_hamiltonian(p, pulse, 5.0);
        CHECK(h.coupling.real() == doctest::Approx(-0.125));
        CHECK(h.diag[p.index_of(0)] == doctest::Approx(0.0));
        CHECK(h.diag[p.index_of(1)] == doctest::Approx(0.0));

        LadderParams p2 = p;
        p2.mu = 1.1;
        HamiltonianSample h2 = sample_hamiltonian(p2, pulse, 5.0);
        CHECK(h2.coupling.real() == doctest::Approx(1.1 * h.coupling.real()));
    }

    SUBCASE("coupling is linear in mu") {
        ControlPulse pulse = blackman_envelope(10.0, 0.3, -3.0);
        SplitMix64 g(7);
        for (int trial = 0; trial < 10; ++trial) {
            double mu = 0.25 + 2.0 * g.uniform();
            LadderParams pm = p;
            pm.mu = mu;
            HamiltonianSample a = sample_hamiltonian(p, pulse, 4.0);
            HamiltonianSample b = sample_hamiltonian(pm, pulse, 4.0);
            CHECK(b.coupling.real() == doctest::Approx(mu * a.coupling.real()).epsilon(1e-13));
            CHECK(b.coupling.imag() == doctest::Approx(mu * a.coupling.imag()).epsilon(1e-13));
        }
    }

    SUBCASE("time outside the grid is rejected") {
        CHECK_THROWS_AS(sample_hamiltonian(p, zero, 10.5), std::out_of_range);
        CHECK_THROWS_AS(sample_hamiltonian(p, zero, -0.1), std::out_of_range);
    }
}

TEST_CASE("parameter validation") {
    LadderParams p;
    p.n_min = 3;
    p.n_max = 3;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = LadderParams{};
    p.mu = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = LadderParams{};
    CHECK_NOTHROW(p.require_guards(0, 10));
    CHECK_THROWS_AS(p.require_guards(0, 13), std::invalid_argument);
    CHECK_THROWS_AS(p.require_guards(-3, 10), std::invalid_argument);
}

TEST_CASE("basis states") {
    LadderParams p;
    StateVector s = StateVector::basis(p, 2);
    CHECK(s.population(2) == 1.0);
    CHECK(s.norm() == doctest::Approx(1.0));
    CHECK(s.size() == p.n_levels());
}
