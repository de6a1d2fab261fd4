#include "robustness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rng.hpp"

namespace bragg {

LandscapeConfig LandscapeConfig::defaults() {
    LandscapeConfig c;
    for (int i = 0; i <= 10; ++i) c.mu_grid.push_back(0.90 + 0.02 * i);
    for (int i = 0; i <= 20; ++i) c.dbeta_grid.push_back(0.02 * i);
    return c;
}

PointStats sample_point(const SchemeEngine& engine, double dbeta, int n, uint64_t seed,
                        double phi_max, double phi_min, double leakage_tol, bool parallel) {
    std::vector<double> pmax(n), pmin(n);
    std::vector<char> flagged(n, 0);

#pragma omp parallel for schedule(static) if (parallel)
    for (int s = 0; s < n; ++s) {
        SplitMix64 g(mix_seed(seed, static_cast<uint64_t>(s)));
        double beta = dbeta * g.normal();
        auto [oa, ob] = engine.run_paired(beta, phi_max, phi_min);
        pmax[s] = oa.p0;
        pmin[s] = ob.p0;
        flagged[s] = (oa.max_guard > leakage_tol) || (ob.max_guard > leakage_tol);
    }

    PointStats st;
    st.n_flagged = 0;
    double sa = 0.0, sb = 0.0;
    for (int s = 0; s < n; ++s) {
        sa += pmax[s];
        sb += pmin[s];
        st.n_flagged += flagged[s];
    }
    double ma = sa / n, mb = sb / n;
    st.p_max_bar = ma;
    st.p_min_bar = mb;

    if (n > 1) {
        double vaa = 0.0, vbb = 0.0, vab = 0.0;
        for (int s = 0; s < n; ++s) {
            double da = pmax[s] - ma, db = pmin[s] - mb;
            vaa += da * da;
            vbb += db * db;
            vab += da * db;
        }
        vaa /= n - 1;
        vbb /= n - 1;
        vab /= n - 1;
        // delta method for C = (ma - mb) / (ma + mb) with paired samples
        double den = ma + mb;
        if (den > 0.0) {
            double ga = 2.0 * mb / (den * den);
            double gb = -2.0 * ma / (den * den);
            double var_c = (ga * ga * vaa + gb * gb * vbb + 2.0 * ga * gb * vab) / n;
            st.stderr_c = var_c > 0.0 ? std::sqrt(var_c) : 0.0;
        }
    }
    return st;
}

PointStats sample_point(const PulseSequence& seq, double mu, double dbeta, int n, uint64_t seed,
                        double phi_max, double phi_min) {
    LadderParams window;
    SchemeEngine engine(seq, window);
    engine.set_mu(mu);
    return sample_point(engine, dbeta, n, seed, phi_max, phi_min, 1e-3, true);
}

static ContrastLandscape scan_common(const PulseSequence& seq, const LandscapeConfig& config,
                                     bool parallel) {
    if (config.mu_grid.empty() || config.dbeta_grid.empty())
        throw std::invalid_argument("scan_landscape: empty grid");
    if (config.n_samples < 1) throw std::invalid_argument("scan_landscape: n_samples < 1");

    ContrastLandscape ls;
    ls.mu_grid = config.mu_grid;
    ls.dbeta_grid = config.dbeta_grid;
    ls.points.resize(ls.mu_grid.size() * ls.dbeta_grid.size());

    LadderParams window;
    SchemeEngine engine(seq, window);

    for (size_t im = 0; im < ls.mu_grid.size(); ++im) {
        engine.set_mu(ls.mu_grid[im]);
        for (size_t ib = 0; ib < ls.dbeta_grid.size(); ++ib) {
            LandscapePoint& pt = ls.points[im * ls.dbeta_grid.size() + ib];
            pt.mu = ls.mu_grid[im];
            pt.dbeta = ls.dbeta_grid[ib];
            pt.n_samples = config.n_samples;
            uint64_t pseed = mix_seed(config.seed, im, ib);
            try {
                PointStats st =
                    sample_point(engine, pt.dbeta, config.n_samples, pseed, config.phi_max,
                                 config.phi_min, config.leakage_tol, parallel);
                pt.p_max_bar = st.p_max_bar;
                pt.p_min_bar = st.p_min_bar;
                pt.c_bar = contrast(st.p_max_bar, st.p_min_bar);
                pt.stderr_c = st.stderr_c;
                pt.n_flagged = st.n_flagged;
                pt.valid = std::isfinite(pt.c_bar);
            } catch (const NumericalError&) {
                pt.valid = false;
            }
        }
    }
    return ls;
}

ContrastLandscape scan_landscape(const PulseSequence& seq, const LandscapeConfig& config) {
    return scan_common(seq, config, true);
}

ContrastLandscape scan_landscape_serial(const PulseSequence& seq, const LandscapeConfig& config) {
    return scan_common(seq, config, false);
}

ImprovementMap improvement_map(const ContrastLandscape& a, const ContrastLandscape& b) {
    if (a.mu_grid != b.mu_grid || a.dbeta_grid != b.dbeta_grid)
        throw std::invalid_argument("improvement_map: grids do not match");
    ImprovementMap m;
    m.mu_grid = a.mu_grid;
    m.dbeta_grid = a.dbeta_grid;
    m.delta_c.resize(a.points.size());
    for (size_t i = 0; i < a.points.size(); ++i)
        m.delta_c[i] = b.points[i].c_bar - a.points[i].c_bar;
    m.max_improvement = m.delta_c.front();
    m.max_loss = 0.0;
    for (size_t i = 0; i < m.delta_c.size(); ++i) {
        if (m.delta_c[i] > m.max_improvement) {
            m.max_improvement = m.delta_c[i];
            m.argmax_i_mu = static_cast<int>(i / m.dbeta_grid.size());
            m.argmax_i_dbeta = static_cast<int>(i % m.dbeta_grid.size());
        }
        if (m.delta_c[i] < m.max_loss) m.max_loss = m.delta_c[i];
    }
    return m;
}

static void put(std::ofstream& out, double v, char sep) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << sep;
}

void write_landscape_csv(const ContrastLandscape& ls, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_landscape_csv: cannot open " + path);
    out << "mu,dbeta,p_max_bar,p_min_bar,c_bar,stderr_c\n";
    for (const auto& pt : ls.points) {
        put(out, pt.mu, ',');
        put(out, pt.dbeta, ',');
        put(out, pt.p_max_bar, ',');
        put(out, pt.p_min_bar, ',');
        put(out, pt.c_bar, ',');
        put(out, pt.stderr_c, '\n');
    }
}

ContrastLandscape read_landscape_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_landscape_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_landscape_csv: empty file");
    ContrastLandscape ls;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        LandscapePoint pt;
        char comma;
        ss >> pt.mu >> comma >> pt.dbeta >> comma >> pt.p_max_bar >> comma >> pt.p_min_bar >>
            comma >> pt.c_bar >> comma >> pt.stderr_c;
        if (!ss) throw std::runtime_error("read_landscape_csv: malformed line: " + line);
        ls.points.push_back(pt);
        if (ls.mu_grid.empty() || ls.mu_grid.back() != pt.mu) {
            if (std::find(ls.mu_grid.begin(), ls.mu_grid.end(), pt.mu) == ls.mu_grid.end())
                ls.mu_grid.push_back(pt.mu);
        }
        if (std::find(ls.dbeta_grid.begin(), ls.dbeta_grid.end(), pt.dbeta) ==
            ls.dbeta_grid.end())
            ls.dbeta_grid.push_back(pt.dbeta);
    }
    if (ls.points.size() != ls.mu_grid.size() * ls.dbeta_grid.size())
        throw std::runtime_error("read_landscape_csv: grid is not rectangular");
    return ls;
}

void write_improvement_csv(const ImprovementMap& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_improvement_csv: cannot open " + path);
    out << "mu,dbeta,delta_c\n";
    for (size_t im = 0; im < m.mu_grid.size(); ++im)
        for (size_t ib = 0; ib < m.dbeta_grid.size(); ++ib) {
            put(out, m.mu_grid[im], ',');
            put(out, m.dbeta_grid[ib], ',');
            put(out, m.delta_c[im * m.dbeta_grid.size() + ib], '\n');
        }
}

} // namespace bragg
