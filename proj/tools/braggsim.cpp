// Command-line front end: simulation, fringe scans, calibration, RAP tuning,
// Monte-Carlo contrast landscapes, and ensemble pulse optimization.

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bragg/krotov.hpp"
#include "bragg/robustness.hpp"
#include "bragg/scheme.hpp"
#include "bragg/tuning.hpp"

using namespace bragg;

namespace {

constexpr double kOmegaKHz = 15.1; // omega_k / 2 pi for Rb-87 at 780 nm

struct SchemeOptions {
    std::string scheme = "rabi";
    std::string split_pulse;
    std::string swap_pulse;
    double dt = 0.01;
};

PulseSequence make_scheme(const SchemeOptions& so) {
    if (so.scheme == "rabi") return build_rabi_scheme(kRabiCorrection, so.dt);
    if (so.scheme == "rap") return build_rap_scheme(RapParams{}, kRabiCorrection, so.dt);
    if (so.split_pulse.empty() || so.swap_pulse.empty())
        throw CLI::ValidationError("--scheme oct requires --split-pulse and --swap-pulse files");
    ControlPulse split = load_pulse_json(so.split_pulse);
    ControlPulse swap = load_pulse_json(so.swap_pulse);
    return build_oct_scheme(split, swap, RapParams{}, so.dt);
}

void add_scheme_options(CLI::App* cmd, SchemeOptions& so) {
    cmd->add_option("--scheme", so.scheme, "rabi | rap | oct")
        ->check(CLI::IsMember({"rabi", "rap", "oct"}));
    cmd->add_option("--split-pulse", so.split_pulse, "optimized splitting pulse (JSON)");
    cmd->add_option("--swap-pulse", so.swap_pulse, "optimized swap pulse (JSON)");
    cmd->add_option("--dt", so.dt, "integrator step, units 1/omega_k")->check(CLI::PositiveNumber);
}

void print_si_note(bool si) {
    if (si)
        std::printf("# SI: omega_k = 2*pi * %.1f kHz (Rb-87, 780 nm); 1/omega_k ~ %.2f us\n",
                    kOmegaKHz, 1e3 / (2.0 * M_PI * kOmegaKHz));
}

std::vector<double> phase_grid(int n) {
    std::vector<double> phis(n);
    for (int i = 0; i < n; ++i) phis[i] = 2.0 * M_PI * i / (n - 1);
    return phis;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Momentum-ladder atom interferometer simulator"};
    app.require_subcommand(1);

    int threads = 0;
    bool si = false;
    app.add_option("--threads", threads, "worker thread cap (default: OMP_NUM_THREADS)");
    app.add_flag("--si", si, "annotate output with Rb-87 / 780 nm unit conversions");

    auto* c_sim = app.add_subcommand("simulate", "run one interferometer sequence");
    SchemeOptions sim_so;
    double sim_mu = 1.0, sim_beta = 0.0, sim_phi = 0.0;
    std::string sim_traj;
    add_scheme_options(c_sim, sim_so);
    c_sim->add_option("--mu", sim_mu, "amplitude scaling factor")->check(CLI::PositiveNumber);
    c_sim->add_option("--beta", sim_beta, "initial momentum / 2 hbar k");
    c_sim->add_option("--phi", sim_phi, "differential phase at the first kick slot");
    c_sim->add_option("--trajectory", sim_traj, "write populations over time (CSV)");

    auto* c_fri = app.add_subcommand("fringe", "final P0 versus differential phase");
    SchemeOptions fri_so;
    double fri_mu = 1.0, fri_beta = 0.0;
    int fri_phases = 32;
    std::string fri_out = "fringe.csv";
    add_scheme_options(c_fri, fri_so);
    c_fri->add_option("--mu", fri_mu)->check(CLI::PositiveNumber);
    c_fri->add_option("--beta", fri_beta);
    c_fri->add_option("--phases", fri_phases, "number of phase samples over [0, 2 pi]")
        ->check(CLI::Range(2, 100000));
    c_fri->add_option("--out", fri_out, "output CSV (phi,p0,p1,leakage)");

    auto* c_cal = app.add_subcommand("calibrate", "pulse-amplitude correction sweep");
    double cal_lo = 0.97, cal_hi = 1.05;
    int cal_n = 33;
    double cal_dt = 0.01;
    std::string cal_out = "calibration.csv";
    c_cal->add_option("--lo", cal_lo, "lowest amplitude scale");
    c_cal->add_option("--hi", cal_hi, "highest amplitude scale");
    c_cal->add_option("--points", cal_n)->check(CLI::Range(3, 10000));
    c_cal->add_option("--dt", cal_dt)->check(CLI::PositiveNumber);
    c_cal->add_option("--out", cal_out);

    auto* c_rap = app.add_subcommand("tune-rap", "Nelder-Mead tuning of the chirped transfer");
    RapParams rap_init;
    std::string rap_out = "rap_params.json";
    std::string rap_pulse_out;
    int rap_max_eval = 2000;
    c_rap->add_option("--alpha", rap_init.alpha, "chirp rate (fixed during tuning)");
    c_rap->add_option("--t-c", rap_init.t_c, "chirp offset guess");
    c_rap->add_option("--t-r", rap_init.t_r, "switch-on/off duration guess");
    c_rap->add_option("--peak", rap_init.peak, "plateau amplitude guess");
    c_rap->add_option("--from", rap_init.n_start, "transfer start level");
    c_rap->add_option("--to", rap_init.n_end, "transfer end level");
    c_rap->add_option("--max-evaluations", rap_max_eval)->check(CLI::PositiveNumber);
    c_rap->add_option("--out", rap_out, "tuned parameters (JSON)");
    c_rap->add_option("--pulse-out", rap_pulse_out, "tuned pulse waveform (JSON)");

    auto* c_scan = app.add_subcommand("scan", "Monte-Carlo contrast landscape");
    SchemeOptions scan_so;
    scan_so.dt = 0.1;
    LandscapeConfig scan_cfg = LandscapeConfig::defaults();
    std::string scan_out = "landscape.csv";
    bool scan_serial = false;
    add_scheme_options(c_scan, scan_so);
    c_scan->add_option("--samples", scan_cfg.n_samples, "Monte-Carlo samples per grid point")
        ->check(CLI::PositiveNumber);
    c_scan->add_option("--seed", scan_cfg.seed);
    c_scan->add_option("--mu-grid", scan_cfg.mu_grid, "explicit mu grid values");
    c_scan->add_option("--dbeta-grid", scan_cfg.dbeta_grid, "explicit dbeta grid values");
    c_scan->add_option("--phi-max", scan_cfg.phi_max, "kick angle for the P-max runs");
    c_scan->add_option("--phi-min", scan_cfg.phi_min, "kick angle for the P-min runs");
    c_scan->add_flag("--serial", scan_serial, "use the serial reference scan");
    c_scan->add_option("--out", scan_out);

    auto* c_diff = app.add_subcommand("diff", "contrast improvement between two landscapes");
    std::string diff_a, diff_b, diff_out = "improvement.csv";
    c_diff->add_option("a", diff_a, "baseline landscape CSV")->required();
    c_diff->add_option("b", diff_b, "comparison landscape CSV")->required();
    c_diff->add_option("--out", diff_out);

    auto* c_opt = app.add_subcommand("optimize", "ensemble pulse optimization");
    std::string opt_target = "split";
    EnsembleSpec opt_spec;
    ControlConstraints opt_cons;
    KrotovOptions opt_opts;
    double opt_dt = 0.01;
    std::string opt_out = "pulse.json";
    std::string opt_record = "optimization_record.csv";
    double opt_sigma = 0.025;
    c_opt->add_option("--target", opt_target, "split | swap | amplify | deamplify")
        ->check(CLI::IsMember({"split", "swap", "amplify", "deamplify"}));
    c_opt->add_option("--ensemble-sigma", opt_sigma, "width of the (mu, beta) ensemble");
    c_opt->add_option("--batches", opt_spec.n_batches)->check(CLI::PositiveNumber);
    c_opt->add_option("--batch-size", opt_spec.batch_size)->check(CLI::PositiveNumber);
    c_opt->add_option("--iters-per-batch", opt_opts.iters_per_batch)->check(CLI::PositiveNumber);
    c_opt->add_option("--max-cycles", opt_opts.max_cycles)->check(CLI::PositiveNumber);
    c_opt->add_option("--seed", opt_spec.seed);
    c_opt->add_option("--omega-max", opt_cons.omega_max)->check(CLI::PositiveNumber);
    c_opt->add_option("--spectral-width", opt_cons.spectral_width)->check(CLI::PositiveNumber);
    c_opt->add_option("--lambda-a", opt_cons.lambda_a, "Krotov step weight (0 = auto)");
    c_opt->add_option("--dt", opt_dt)->check(CLI::PositiveNumber);
    c_opt->add_option("--out", opt_out, "optimized pulse (JSON)");
    c_opt->add_option("--record", opt_record, "per-iteration record (CSV)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (threads > 0) omp_set_num_threads(threads);
    LadderParams window;

    try {
        if (*c_sim) {
            PulseSequence seq = make_scheme(sim_so);
            LadderParams params = window;
            params.mu = sim_mu;
            params.beta = sim_beta;
            PropagationConfig cfg;
            cfg.method = StepMethod::split2;
            cfg.dt = sim_so.dt;
            Trajectory traj;
            Trajectory* tp = sim_traj.empty() ? nullptr : &traj;
            if (tp) {
                int total_steps = static_cast<int>(seq.total_duration() / cfg.dt);
                cfg.trajectory_stride = std::max(1, total_steps / 4000);
                cfg.store_trajectory = true;
            }
            SchemeResult res = run_scheme(seq, params, sim_phi, cfg, tp);
            double p0 = res.final_state.population(0);
            double p1 = res.final_state.population(1);
            print_si_note(si);
            std::printf("scheme=%s T=%.4f mu=%g beta=%g phi=%g P0=%.6f P1=%.6f leak=%.3e%s\n",
                        seq.name.c_str(), seq.total_duration(), sim_mu, sim_beta, sim_phi, p0,
                        p1, 1.0 - p0 - p1, res.leakage_flagged ? " [leakage flagged]" : "");
            if (tp) {
                write_trajectory_csv(traj, params, sim_traj);
                std::printf("trajectory -> %s\n", sim_traj.c_str());
            }
        } else if (*c_fri) {
            PulseSequence seq = make_scheme(fri_so);
            LadderParams params = window;
            params.mu = fri_mu;
            params.beta = fri_beta;
            PropagationConfig cfg;
            cfg.method = StepMethod::split2;
            cfg.dt = fri_so.dt;
            FringeResult fr = fringe_scan(seq, params, phase_grid(fri_phases), cfg);
            double pmax = *std::max_element(fr.p0.begin(), fr.p0.end());
            double pmin = *std::min_element(fr.p0.begin(), fr.p0.end());
            write_fringe_csv(fr, fri_out);
            print_si_note(si);
            std::printf("scheme=%s fringe: P0_max=%.6f P0_min=%.6f contrast=%.6f -> %s\n",
                        seq.name.c_str(), pmax, pmin, contrast(pmax, pmin), fri_out.c_str());
        } else if (*c_cal) {
            CalibrationResult cal = calibration_sweep(linspace(cal_lo, cal_hi, cal_n), cal_dt);
            std::ofstream out(cal_out);
            out << "scale,error\n";
            char buf[32];
            for (size_t i = 0; i < cal.scales.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", cal.scales[i]);
                out << buf << ",";
                std::snprintf(buf, sizeof buf, "%.17g", cal.errors[i]);
                out << buf << "\n";
            }
            print_si_note(si);
            std::printf("calibration minimum: scale=%.5f error=%.3e -> %s\n", cal.argmin_scale,
                        cal.min_error, cal_out.c_str());
        } else if (*c_rap) {
            NelderMeadOptions nm;
            nm.max_evaluations = rap_max_eval;
            RapTuneResult res = tune_rap(rap_init, window, nm);
            nlohmann::json j = {{"alpha", res.params.alpha},     {"t_c", res.params.t_c},
                                {"t_r", res.params.t_r},         {"peak", res.params.peak},
                                {"n_start", res.params.n_start}, {"n_end", res.params.n_end},
                                {"fidelity", res.fidelity},      {"converged", res.converged},
                                {"evaluations", res.evaluations}};
            std::ofstream(rap_out) << j.dump(2) << "\n";
            if (!rap_pulse_out.empty()) save_pulse_json(rap_pulse(res.params), rap_pulse_out);
            print_si_note(si);
            std::printf("tuned RAP %d->%d: t_c=%.4f t_r=%.4f peak=%.4f fidelity=%.6f%s -> %s\n",
                        res.params.n_start, res.params.n_end, res.params.t_c, res.params.t_r,
                        res.params.peak, res.fidelity, res.converged ? "" : " [not converged]",
                        rap_out.c_str());
        } else if (*c_scan) {
            PulseSequence seq = make_scheme(scan_so);
            ContrastLandscape ls = scan_serial ? scan_landscape_serial(seq, scan_cfg)
                                               : scan_landscape(seq, scan_cfg);
            write_landscape_csv(ls, scan_out);
            const LandscapePoint* best = &ls.points.front();
            for (const auto& pt : ls.points)
                if (pt.c_bar > best->c_bar) best = &pt;
            print_si_note(si);
            std::printf("scan %s: %zu points, %d samples each; peak c_bar=%.4f at "
                        "(mu=%.3f, dbeta=%.3f) -> %s\n",
                        seq.name.c_str(), ls.points.size(), scan_cfg.n_samples, best->c_bar,
                        best->mu, best->dbeta, scan_out.c_str());
        } else if (*c_diff) {
            ContrastLandscape a = read_landscape_csv(diff_a);
            ContrastLandscape b = read_landscape_csv(diff_b);
            ImprovementMap m = improvement_map(a, b);
            write_improvement_csv(m, diff_out);
            std::printf("improvement: max dC=%.4f at (mu=%.3f, dbeta=%.3f); max loss=%.4f -> %s\n",
                        m.max_improvement, m.mu_grid[m.argmax_i_mu],
                        m.dbeta_grid[m.argmax_i_dbeta], m.max_loss, diff_out.c_str());
        } else if (*c_opt) {
            opt_spec.sigma_mu = opt_sigma;
            opt_spec.sigma_beta = opt_sigma;
            opt_spec.n_points = opt_spec.batch_size * opt_spec.n_batches;
            KrotovTask task;
            if (opt_target == "split")
                task = KrotovTask::split(window, opt_dt);
            else if (opt_target == "swap")
                task = KrotovTask::swap(window, opt_dt);
            else if (opt_target == "amplify")
                task = KrotovTask::amplify(window, RapParams{}, opt_dt);
            else
                task = KrotovTask::deamplify(window, RapParams{}, opt_dt);
            auto [pulse, rec] = optimize(task, opt_spec, opt_cons, opt_opts);
            save_pulse_json(pulse, opt_out);
            rec.write_csv(opt_record);
            EnsembleSpec fresh = opt_spec;
            fresh.seed = opt_spec.seed + 1;
            fresh.n_points = 128;
            fresh.batch_size = 128;
            fresh.n_batches = 1;
            double infid = ensemble_infidelity(task, pulse, sample_ensemble(fresh)[0]);
            print_si_note(si);
            std::printf("optimize %s: %zu iterations, fresh-ensemble infidelity=%.4e, "
                        "max|Omega|=%.4f (%s) -> %s, %s\n",
                        opt_target.c_str(), rec.iterations.size(), infid,
                        pulse.max_abs_omega(), rec.stop_reason.c_str(), opt_out.c_str(),
                        opt_record.c_str());
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
