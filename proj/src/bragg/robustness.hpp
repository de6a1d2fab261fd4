#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scheme.hpp"

namespace bragg {

// Monte-Carlo contrast landscape over amplitude scaling mu and velocity
// spread dbeta. The kick angles give the fringe maximum and minimum; samples
// are paired (same beta draws for both angles).
struct LandscapeConfig {
    std::vector<double> mu_grid;    // default 0.90 .. 1.10, step 0.02
    std::vector<double> dbeta_grid; // default 0 .. 0.40, step 0.02
    int n_samples = 2000;
    uint64_t seed = 20240901;
    double phi_max = 0.0;
    double phi_min = M_PI;
    double leakage_tol = 1e-3;

    static LandscapeConfig defaults();
};

struct LandscapePoint {
    double mu = 0.0;
    double dbeta = 0.0;
    double p_max_bar = 0.0;
    double p_min_bar = 0.0;
    double c_bar = 0.0;
    double stderr_c = 0.0;
    int n_samples = 0;
    int n_flagged = 0; // propagations whose guard-level population exceeded tolerance
    bool valid = true;
};

struct ContrastLandscape {
    std::vector<double> mu_grid;
    std::vector<double> dbeta_grid;
    std::vector<LandscapePoint> points; // row-major: mu index major, dbeta minor

    const LandscapePoint& at(int i_mu, int i_dbeta) const {
        return points[static_cast<size_t>(i_mu) * dbeta_grid.size() + i_dbeta];
    }
};

struct PointStats {
    double p_max_bar = 0.0;
    double p_min_bar = 0.0;
    double stderr_c = 0.0;
    int n_flagged = 0;
};

// Ensemble means of P0 at the two kick angles for n paired samples with
// beta ~ Normal(0, dbeta). Identical seed gives identical draws; results do
// not depend on the thread count.
PointStats sample_point(const PulseSequence& seq, double mu, double dbeta, int n, uint64_t seed,
                        double phi_max = 0.0, double phi_min = M_PI);

PointStats sample_point(const SchemeEngine& engine, double dbeta, int n, uint64_t seed,
                        double phi_max, double phi_min, double leakage_tol, bool parallel);

ContrastLandscape scan_landscape(const PulseSequence& seq, const LandscapeConfig& config);
ContrastLandscape scan_landscape_serial(const PulseSequence& seq, const LandscapeConfig& config);

struct ImprovementMap {
    std::vector<double> mu_grid;
    std::vector<double> dbeta_grid;
    std::vector<double> delta_c; // c_bar(b) - c_bar(a)
    double max_improvement = 0.0;
    double max_loss = 0.0; // most negative delta
    int argmax_i_mu = 0, argmax_i_dbeta = 0;
};

ImprovementMap improvement_map(const ContrastLandscape& a, const ContrastLandscape& b);

void write_landscape_csv(const ContrastLandscape& ls, const std::string& path);
ContrastLandscape read_landscape_csv(const std::string& path);
void write_improvement_csv(const ImprovementMap& m, const std::string& path);

} // namespace bragg
