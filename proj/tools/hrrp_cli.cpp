#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hrrp/bench.hpp"
#include "hrrp/coherence.hpp"
#include "hrrp/config.hpp"
#include "hrrp/io.hpp"
#include "hrrp/svg.hpp"

namespace fs = std::filesystem;
using namespace hrrp;

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kInvalid = 2;

struct Common {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    int threads = 0;
    bool verbose = false;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
};

struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config = true) {
    auto* opt = cmd->add_option("--config", c.config, "JSON configuration file");
    if (needs_config) opt->required();
    cmd->add_option("--out", c.out, "output directory (created if absent)");
    c.seed_opt = cmd->add_option("--seed", c.seed, "override the master seed");
    c.threads_opt = cmd->add_option("--threads", c.threads, "worker threads for bench")->check(CLI::PositiveNumber);
    cmd->add_flag("--verbose", c.verbose, "echo the effective configuration");
}

RunConfig load(const Common& c) {
    RunConfig rc = c.config.empty() ? RunConfig{} : load_config(c.config);
    if (c.seed_opt && c.seed_opt->count()) rc.experiment.master_seed = c.seed;
    if (c.threads_opt && c.threads_opt->count()) rc.experiment.threads = c.threads;
    rc.experiment.validate();
    if (c.verbose) std::cout << dump_config(rc) << '\n';
    return rc;
}

fs::path out_dir(const Common& c) {
    fs::path p(c.out);
    fs::create_directories(p);
    return p;
}

std::string snr_label(double s) { return std::isinf(s) ? std::string("noiseless") : format_snr(s) + " dB"; }

std::string snr_file_tag(double s) { return std::isinf(s) ? std::string("noiseless") : format_snr(s) + "dB"; }

SensingDictionary obtain_sd(const ExperimentConfig& cfg, const Dictionary& dict, bool verbose) {
    const auto blocks = dict.blocks();
    if (cfg.sd_path) {
        auto sd = read_sensing_dictionary(fs::path(*cfg.sd_path));
        if (sd.design_inputs_digest != blocks_digest(blocks))
            throw InvalidInput("sensing dictionary " + *cfg.sd_path + " was designed for a different dictionary");
        return sd;
    }
    if (verbose) std::cout << "designing sensing dictionary (" << cfg.sd_options.max_iterations << " iterations max)\n";
    return design_sd(blocks, cfg.sd_gamma, cfg.sd_options);
}

void write_iai(const fs::path& dir, const std::string& stem, const std::string& title, const IaiReport& r) {
    write_histogram_csv(dir / (stem + ".csv"), r);
    std::vector<double> edges(r.offdiag_histogram.edges.begin(), r.offdiag_histogram.edges.end());
    std::vector<double> counts(r.offdiag_histogram.counts.begin(), r.offdiag_histogram.counts.end());
    svg::PlotSpec spec{title, "|w_k^H phi_dl|, k != l", "count"};
    svg::write(dir / (stem + ".svg"), svg::bar_plot(spec, edges, counts));
}

// Aggregates, CSV tables and figures shared by bench and export.
BenchReport emit_reports(const fs::path& dir, const std::vector<TrialResult>& results) {
    const BenchReport report = aggregate(results);
    write_aggregate_csv(dir / "aggregate.csv", report);
    write_cde_csv(dir / "cde.csv", report);

    std::vector<Algorithm> algs;
    std::vector<double> snrs;
    for (const auto& c : report.cells) {
        if (std::find(algs.begin(), algs.end(), c.algorithm) == algs.end()) algs.push_back(c.algorithm);
        if (std::find(snrs.begin(), snrs.end(), c.snr_db) == snrs.end()) snrs.push_back(c.snr_db);
    }

    // Noiseless is drawn one step beyond the largest finite SNR.
    double top = 0.0;
    for (double s : snrs)
        if (std::isfinite(s)) top = std::max(top, s);
    std::vector<svg::Series> success;
    for (Algorithm a : algs) {
        svg::Series s{to_string(a), {}, {}};
        std::vector<std::pair<double, double>> pts;
        for (double snr : snrs)
            if (const auto* c = report.find(a, snr))
                pts.emplace_back(std::isinf(snr) ? top + 5.0 : snr, c->success_probability);
        std::sort(pts.begin(), pts.end());
        for (auto [x, y] : pts) {
            s.x.push_back(x);
            s.y.push_back(y);
        }
        success.push_back(std::move(s));
    }
    svg::write(dir / "success_vs_snr.svg",
               svg::line_plot({"Success probability vs SNR (noiseless at right end)", "SNR (dB)", "success probability"},
                              success));

    for (double snr : snrs) {
        std::vector<svg::Series> curves;
        for (Algorithm a : algs) {
            if (const auto* c = report.find(a, snr)) curves.push_back({to_string(a), c->cde.thresholds, c->cde.fraction});
        }
        svg::PlotSpec spec{"Cumulative error distribution, " + snr_label(snr), "relative l2 error", "fraction of trials"};
        spec.log_x = true;
        svg::write(dir / ("cde_" + snr_file_tag(snr) + ".svg"), svg::line_plot(spec, curves));
    }

    std::set<Algorithm> present(algs.begin(), algs.end());
    if (present.size() == 3) {
        const auto rows = timing_comparison(results);
        write_timing_csv(dir / "timing.csv", rows);
        std::printf("%-8s %14s %18s %12s %14s\n", "method", "time (s)", "correlations", "iterations", "corr/iter");
        for (const auto& r : rows)
            std::printf("%-8s %14.6f %18llu %12lld %14.2f\n", to_string(r.algorithm).c_str(), r.total_seconds,
                        static_cast<unsigned long long>(r.total_correlations), r.total_iterations,
                        r.correlations_per_iteration);
    }
    std::printf("%-8s %10s %8s %10s %10s %12s\n", "method", "snr", "trials", "success", "exact", "mean error");
    for (const auto& c : report.cells)
        std::printf("%-8s %10s %8d %10.3f %10d %12.4g\n", to_string(c.algorithm).c_str(), format_snr(c.snr_db).c_str(),
                    c.trials, c.success_probability, c.exact_support_successes, c.mean_relative_error);
    return report;
}

int cmd_design_sd(const Common& c) {
    const RunConfig rc = load(c);
    const auto& cfg = rc.experiment;
    const fs::path dir = out_dir(c);
    Experiment ex(cfg);
    const Dictionary& dict = ex.dictionary_for(0);
    const auto blocks = dict.blocks();

    const auto start = std::chrono::steady_clock::now();
    const SensingDictionary sd = design_sd(blocks, cfg.sd_gamma, cfg.sd_options);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_sensing_dictionary(dir / "sd.txt", sd);

    {
        std::ofstream trace(dir / "sd_trace.csv", std::ios::binary);
        trace << "#schema,hrrp-sd-trace," << kCsvSchemaVersion << "\niteration,objective\n";
        char buf[64];
        for (std::size_t i = 0; i < sd.trace.objective.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, sd.trace.objective[i]);
            trace << buf;
        }
    }
    const SdBounds base = evaluate_sd(blocks.front(), blocks);
    std::printf("sensing dictionary %dx%d written to %s\n", static_cast<int>(sd.w.rows()), static_cast<int>(sd.w.cols()),
                (dir / "sd.txt").string().c_str());
    std::printf("b1 = %.6f  b2 = %.6f  objective (gamma %.3g) = %.6f\n", sd.b1, sd.b2, sd.gamma, sd.objective());
    std::printf("W = Phi_1 baseline: b1 = %.6f  b2 = %.6f  objective = %.6f\n", base.b1, base.b2,
                base.objective(sd.gamma));
    std::printf("iterations %d, stop reason %s, %.2f s\n", sd.trace.iterations, sd.trace.stop_reason.c_str(), seconds);
    if (!sd.trace.converged) std::printf("warning: solver did not converge (header records converged 0)\n");
    return kOk;
}

int cmd_synthesize(const Common& c, int trial) {
    const RunConfig rc = load(c);
    const auto& cfg = rc.experiment;
    if (trial < 0 || trial >= cfg.trials) throw InvalidInput("trial index outside [0, trials)");
    const fs::path dir = out_dir(c);
    Experiment ex(cfg);
    const Dictionary& dict = ex.dictionary_for(trial);
    const Target target = ex.target_for(trial, dict.num_cells());
    const double snr = cfg.snr_db.front();
    Measurement m;
    m.retained_pulses = dict.retained_pulses();
    m.snr_db = snr;
    m.noise_seed = derive_seed({cfg.master_seed, 0x73796e7468ull, static_cast<std::uint64_t>(trial)});
    m.samples = add_awgn(synthesize_echo(dict, target), snr, m.noise_seed);
    write_measurement(dir / "measurement.txt", m);
    std::printf("measurement with %d samples (%s) written to %s\n", static_cast<int>(m.samples.size()),
                snr_label(snr).c_str(), (dir / "measurement.txt").string().c_str());
    for (const auto& s : target.scatterers)
        std::printf("  scatterer: %.4f m, alpha %+g, intensity %g\n", s.cell * dict.cell_size(),
                    cfg.scenario.mechanisms[static_cast<std::size_t>(s.mechanism)], s.intensity);
    return kOk;
}

int cmd_recover(const Common& c, const std::string& measurement_path) {
    const RunConfig rc = load(c);
    const auto& cfg = rc.experiment;
    const Measurement m = read_measurement(fs::path(measurement_path));
    const auto count = static_cast<int>(m.samples.size());
    if (count != cfg.pulse_count)
        throw InvalidInput("measurement length mismatch: expected " + std::to_string(cfg.pulse_count) +
                           " samples (pulses.count), found " + std::to_string(count));
    for (int p : m.retained_pulses)
        if (p < 0 || p >= cfg.scenario.num_pulses)
            throw InvalidInput("measurement pulse index " + std::to_string(p) + " outside [0, " +
                               std::to_string(cfg.scenario.num_pulses) + ")");
    const fs::path dir = out_dir(c);
    const Dictionary dict = build_dictionary(cfg.scenario, m.retained_pulses);

    StopRule stop;
    if (rc.recover.epsilon) {
        stop.epsilon = *rc.recover.epsilon;
    } else if (std::isinf(m.snr_db)) {
        stop.epsilon = noiseless_epsilon(m.samples);
    } else {
        // Measured power is signal plus noise.
        const double power = m.samples.squaredNorm() / count;
        stop.epsilon = awgn_epsilon(count, power / (1.0 + std::pow(10.0, m.snr_db / 10.0)));
    }
    stop.k_max = rc.recover.k_max.value_or(std::max(1, count / 2));

    SparseSolution sol;
    switch (rc.recover.algorithm) {
        case Algorithm::omp: sol = omp(m.samples, dict, stop); break;
        case Algorithm::a_omp: sol = a_omp(m.samples, dict, cfg.a_omp_block(), stop); break;
        case Algorithm::omp_sd: sol = omp_sd(m.samples, dict, obtain_sd(cfg, dict, c.verbose), stop); break;
    }
    const Srp srp = reconstruct_srp(sol, dict);
    write_srp_csv(dir / "srp.csv", srp);

    std::vector<std::string> labels(srp.range_axis.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (int d : srp.mechanisms[i]) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%s%+g", labels[i].empty() ? "a=" : ",",
                          cfg.scenario.mechanisms[static_cast<std::size_t>(d)]);
            labels[i] += buf;
        }
    }
    svg::write(dir / "srp.svg", svg::stem_plot({"Synthetic range profile (" + to_string(rc.recover.algorithm) + ")",
                                                "range (m)", "|intensity|"},
                                               srp.range_axis, srp.magnitude, labels));

    const auto intensities = solution_intensities(dict, sol);
    std::printf("algorithm %s, epsilon %.6g, k_max %d\n", to_string(rc.recover.algorithm).c_str(), stop.epsilon,
                stop.k_max);
    std::printf("support (%zu atoms):\n", sol.support.size());
    for (std::size_t i = 0; i < sol.support.size(); ++i) {
        const int g = sol.support[i];
        std::printf("  atom %4d: range %.4f m, alpha %+g, intensity %.6g%+.6gj\n", g, dict.cell_of(g) * dict.cell_size(),
                    cfg.scenario.mechanisms[static_cast<std::size_t>(dict.mechanism_of(g))], intensities[i].real(),
                    intensities[i].imag());
    }
    std::printf("iterations %d, correlations %llu, stop reason %s, final residual %.6g\n", sol.iterations,
                static_cast<unsigned long long>(sol.correlation_count), to_string(sol.stop_reason).c_str(),
                sol.residual_norm_history.back());
    return kOk;
}

int cmd_bench(const Common& c) {
    const RunConfig rc = load(c);
    const auto& cfg = rc.experiment;
    const fs::path dir = out_dir(c);
    Experiment ex(cfg);

    std::vector<TrialResult> results;
    std::vector<std::string> failures;
    try {
        results = ex.run_all();
    } catch (const std::exception& e) {
        // Rerun per algorithm so the healthy ones are still reported.
        if (c.verbose) std::cerr << "bench: " << e.what() << "; retrying per algorithm\n";
        std::map<Algorithm, bool> ok;
        std::vector<TrialResult> partial;
        for (Algorithm a : cfg.algorithms) {
            std::vector<TrialResult> rows;
            try {
                for (int t = 0; t < cfg.trials; ++t)
                    for (double snr : cfg.snr_db) rows.push_back(ex.run_trial(t, a, snr));
                partial.insert(partial.end(), rows.begin(), rows.end());
            } catch (const std::exception& inner) {
                failures.push_back(to_string(a) + ": " + inner.what());
            }
        }
        results = std::move(partial);
    }
    for (const auto& f : failures) std::fprintf(stderr, "error: algorithm %s\n", f.c_str());
    if (results.empty()) return kPartial;

    write_trials_csv(dir / "trials.csv", results);
    emit_reports(dir, results);

    const bool has_sd = std::find(cfg.algorithms.begin(), cfg.algorithms.end(), Algorithm::omp_sd) !=
                        cfg.algorithms.end();
    if (has_sd && failures.empty()) {
        const Dictionary& dict = ex.dictionary_for(0);
        const auto blocks = dict.blocks();
        const SensingDictionary& sd = ex.sensing_for(0);
        write_iai(dir, "iai_original", "IAI of the original dictionary (W = Phi_1)", iai_stats(blocks.front(), blocks));
        write_iai(dir, "iai_sensing", "IAI of the sensing dictionary", iai_stats(sd.w, blocks));
        std::printf("sensing dictionary (trial 0 draw): b1 = %.6f  b2 = %.6f\n", sd.b1, sd.b2);
    }
    std::printf("config digest %s; outputs in %s\n", hex64(cfg.digest()).c_str(), dir.string().c_str());
    return failures.empty() ? kOk : kPartial;
}

int cmd_coherence(const Common& c, bool with_sd) {
    const RunConfig rc = load(c);
    const auto& cfg = rc.experiment;
    const fs::path dir = out_dir(c);
    Experiment ex(cfg);
    const Dictionary& dict = ex.dictionary_for(0);
    const auto blocks = dict.blocks();
    const DictionaryCoherence coh = dictionary_coherence(dict);

    {
        std::ofstream out(dir / "coherence.csv", std::ios::binary);
        out << "#schema,hrrp-coherence," << kCsvSchemaVersion << "\nmetric,value\n";
        char buf[96];
        auto row = [&](const std::string& name, double v) {
            std::snprintf(buf, sizeof buf, ",%.17g\n", v);
            out << name << buf;
        };
        row("full_mip", coh.full_mip);
        for (std::size_t d = 0; d < coh.block_mip.size(); ++d) {
            std::snprintf(buf, sizeof buf, "block_mip_alpha_%+g", cfg.scenario.mechanisms[d]);
            row(buf, coh.block_mip[d]);
        }
        row("cross_block_offdiag_max", coh.cross_block_offdiag_max);
        row("mismatched_diag_min", coh.mismatched_diag_min);
        row("mismatched_diag_max", coh.mismatched_diag_max);
    }
    std::printf("full dictionary MIP         %.6f\n", coh.full_mip);
    for (std::size_t d = 0; d < coh.block_mip.size(); ++d)
        std::printf("block alpha %+5.2f MIP       %.6f\n", cfg.scenario.mechanisms[d], coh.block_mip[d]);
    std::printf("cross-block off-diag max    %.6f\n", coh.cross_block_offdiag_max);
    std::printf("mismatched diag range       [%.6f, %.6f]\n", coh.mismatched_diag_min, coh.mismatched_diag_max);

    const IaiReport orig = iai_stats(blocks.front(), blocks);
    write_iai(dir, "iai_original", "IAI of the original dictionary (W = Phi_1)", orig);
    std::printf("W = Phi_1: diag min %.6f, off-diag max %.6f\n", orig.diag_min, orig.offdiag_max);
    if (with_sd) {
        const SensingDictionary sd = obtain_sd(cfg, dict, c.verbose);
        const IaiReport rep = iai_stats(sd.w, blocks);
        write_iai(dir, "iai_sensing", "IAI of the sensing dictionary", rep);
        std::printf("sensing dictionary: diag min %.6f, off-diag max %.6f (b1 %.6f, b2 %.6f)\n", rep.diag_min,
                    rep.offdiag_max, sd.b1, sd.b2);
    }
    return kOk;
}

int cmd_export(const Common& c, const std::string& trials_path) {
    const fs::path dir = out_dir(c);
    const fs::path src = trials_path.empty() ? dir / "trials.csv" : fs::path(trials_path);
    const auto results = read_trials_csv(src);
    if (results.empty()) throw InvalidInput(src.string() + " holds no trials");
    const BenchReport report = emit_reports(dir, results);
    std::printf("re-exported %zu trials (config digest %s) into %s\n", results.size(),
                hex64(report.config_digest).c_str(), dir.string().c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse HRRP synthesis with GTD dictionaries and sensing dictionaries"};
    app.require_subcommand(1, 1);

    Common design_c, recover_c, bench_c, coh_c, export_c, synth_c;
    auto* design = app.add_subcommand("design-sd", "design a sensing dictionary offline");
    add_common(design, design_c);

    std::string measurement;
    auto* recover = app.add_subcommand("recover", "recover a range profile from one measurement file");
    add_common(recover, recover_c);
    recover->add_option("--measurement", measurement, "measurement file")->required();

    auto* bench = app.add_subcommand("bench", "run a seeded Monte Carlo campaign");
    add_common(bench, bench_c);

    bool no_sd = false;
    auto* coh = app.add_subcommand("coherence", "report dictionary coherence and IAI statistics");
    add_common(coh, coh_c);
    coh->add_flag("--no-sd", no_sd, "skip the sensing dictionary statistics");

    std::string trials_path;
    auto* exp = app.add_subcommand("export", "rebuild tables and figures from a trials CSV");
    add_common(exp, export_c, false);
    exp->add_option("--trials", trials_path, "trials CSV (default: <out>/trials.csv)");

    int trial = 0;
    auto* synth = app.add_subcommand("synthesize", "write a simulated measurement file");
    add_common(synth, synth_c);
    synth->add_option("--trial", trial, "trial whose pulse draw and target are used");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalid;
    }

    try {
        if (*design) return cmd_design_sd(design_c);
        if (*recover) return cmd_recover(recover_c, measurement);
        if (*bench) return cmd_bench(bench_c);
        if (*coh) return cmd_coherence(coh_c, !no_sd);
        if (*exp) return cmd_export(export_c, trials_path);
        if (*synth) return cmd_synthesize(synth_c, trial);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInvalid;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInvalid;
    } catch (const InvalidInput& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInvalid;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInvalid;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kPartial;
    }
    return kInvalid;
}
