#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "bragg/robustness.hpp"

using namespace bragg;

namespace {

PulseSequence fast_rabi() { return build_rabi_scheme(kRabiCorrection, 0.1); }

LandscapeConfig tiny_config() {
    LandscapeConfig cfg;
    cfg.mu_grid = {0.95, 1.0};
    cfg.dbeta_grid = {0.0, 0.1, 0.2};
    cfg.n_samples = 40;
    cfg.seed = 321;
    return cfg;
}

} // namespace

TEST_CASE("single-point sampling") {
    PulseSequence seq = fast_rabi();
    LadderParams win;
    SchemeEngine eng(seq, win);
    eng.set_mu(1.0);

    SUBCASE("no velocity spread reproduces the ideal run") {
        PointStats st = sample_point(eng, 0.0, 25, 9, 0.0, M_PI, 1e-3, true);
        CHECK(st.p_max_bar > 0.99);
        CHECK(st.p_min_bar < 0.01);
        CHECK(st.stderr_c < 1e-12); // identical samples
    }
    SUBCASE("zero width ignores the seed") {
        PointStats a = sample_point(eng, 0.0, 10, 1, 0.0, M_PI, 1e-3, true);
        PointStats b = sample_point(eng, 0.0, 10, 999, 0.0, M_PI, 1e-3, true);
        CHECK(a.p_max_bar == b.p_max_bar);
        CHECK(a.p_min_bar == b.p_min_bar);
    }
    SUBCASE("fixed seed repeats exactly, including with one sample") {
        PointStats a = sample_point(eng, 0.15, 1, 77, 0.0, M_PI, 1e-3, true);
        PointStats b = sample_point(eng, 0.15, 1, 77, 0.0, M_PI, 1e-3, true);
        CHECK(a.p_max_bar == b.p_max_bar);
        CHECK(a.p_min_bar == b.p_min_bar);
    }
    SUBCASE("serial and parallel sampling are bit-identical") {
        PointStats a = sample_point(eng, 0.2, 64, 5, 0.0, M_PI, 1e-3, false);
        PointStats b = sample_point(eng, 0.2, 64, 5, 0.0, M_PI, 1e-3, true);
        CHECK(a.p_max_bar == b.p_max_bar);
        CHECK(a.p_min_bar == b.p_min_bar);
        CHECK(a.stderr_c == b.stderr_c);
    }
}

TEST_CASE("paired draws cut the contrast variance") {
    PulseSequence seq = fast_rabi();
    LadderParams win;
    SchemeEngine eng(seq, win);
    eng.set_mu(1.0);
    const double dbeta = 0.15;
    const int n = 40, reps = 12;

    std::vector<double> c_paired, c_indep;
    for (int r = 0; r < reps; ++r) {
        PointStats p = sample_point(eng, dbeta, n, 1000 + r, 0.0, M_PI, 1e-3, true);
        c_paired.push_back(contrast(p.p_max_bar, p.p_min_bar));
        // independent draws: different beta samples for the two kick angles
        PointStats qa = sample_point(eng, dbeta, n, 2000 + r, 0.0, M_PI, 1e-3, true);
        PointStats qb = sample_point(eng, dbeta, n, 3000 + r, 0.0, M_PI, 1e-3, true);
        c_indep.push_back(contrast(qa.p_max_bar, qb.p_min_bar));
    }
    auto variance = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= v.size();
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return s / (v.size() - 1);
    };
    CHECK(variance(c_paired) < variance(c_indep));
}

TEST_CASE("landscape scan") {
    PulseSequence seq = fast_rabi();
    LandscapeConfig cfg = tiny_config();
    ContrastLandscape ls = scan_landscape(seq, cfg);

    SUBCASE("grid shape and value ranges") {
        REQUIRE(ls.points.size() == 6);
        for (const auto& pt : ls.points) {
            CHECK(pt.valid);
            CHECK(pt.p_max_bar >= 0.0);
            CHECK(pt.p_max_bar <= 1.0);
            CHECK(pt.p_min_bar >= 0.0);
            CHECK(pt.c_bar <= 1.0);
            CHECK(pt.c_bar >= -1.0);
        }
        CHECK(ls.at(1, 0).c_bar > 0.99); // ideal corner
    }
    SUBCASE("contrast degrades with velocity spread") {
        CHECK(ls.at(1, 0).c_bar > ls.at(1, 2).c_bar);
    }
    SUBCASE("serial scan is bit-identical") {
        ContrastLandscape ls2 = scan_landscape_serial(seq, cfg);
        for (size_t i = 0; i < ls.points.size(); ++i) {
            CHECK(ls2.points[i].c_bar == ls.points[i].c_bar);
            CHECK(ls2.points[i].stderr_c == ls.points[i].stderr_c);
        }
    }
    SUBCASE("csv round trip preserves the values") {
        std::string path = "landscape_test.csv";
        write_landscape_csv(ls, path);
        ContrastLandscape rd = read_landscape_csv(path);
        std::remove(path.c_str());
        REQUIRE(rd.points.size() == ls.points.size());
        for (size_t i = 0; i < ls.points.size(); ++i) {
            CHECK(rd.points[i].mu == ls.points[i].mu);
            CHECK(rd.points[i].c_bar == ls.points[i].c_bar);
            CHECK(rd.points[i].stderr_c == ls.points[i].stderr_c);
        }
    }
    SUBCASE("rerunning the scan is deterministic") {
        ContrastLandscape ls2 = scan_landscape(seq, cfg);
        for (size_t i = 0; i < ls.points.size(); ++i)
            CHECK(ls2.points[i].c_bar == ls.points[i].c_bar);
    }
}

TEST_CASE("improvement maps") {
    PulseSequence seq = fast_rabi();
    LandscapeConfig cfg = tiny_config();
    ContrastLandscape a = scan_landscape(seq, cfg);

    SUBCASE("identical landscapes difference to zero") {
        ImprovementMap m = improvement_map(a, a);
        for (double d : m.delta_c) CHECK(d == 0.0);
        CHECK(m.max_improvement == 0.0);
        CHECK(m.max_loss == 0.0);
    }
    SUBCASE("a shifted copy reports the shift") {
        ContrastLandscape b = a;
        for (auto& pt : b.points) pt.c_bar += 0.25;
        b.points[2].c_bar -= 0.5;
        ImprovementMap m = improvement_map(a, b);
        CHECK(m.max_improvement == doctest::Approx(0.25));
        CHECK(m.max_loss == doctest::Approx(-0.25));
    }
    SUBCASE("grid mismatch is an error") {
        ContrastLandscape b = a;
        b.mu_grid.push_back(1.2);
        CHECK_THROWS_AS(improvement_map(a, b), std::invalid_argument);
    }
}
