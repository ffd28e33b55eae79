// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "hrrp/bench.hpp"
#include "hrrp/coherence.hpp"
#include "hrrp/sd_design.hpp"
#include "hrrp/solvers.hpp"
#include "oracles.hpp"

using namespace hrrp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void info(const std::string& what) { notes.push_back("     " + what); }
};

std::string fmt(const char* f, double a) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

template <class... T>
std::string fmtn(const char* f, T... args) {
    char buf[320];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void report(int id, const char* title, const Verdict& v) {
    for (const auto& n : v.notes) std::printf("  [%d] %s\n", id, n.c_str());
    std::printf("criterion %d: %s - %s\n", id, v.pass ? "PASS" : "FAIL", title);
    std::fflush(stdout);
}

const char* name(Algorithm a) {
    switch (a) {
        case Algorithm::omp: return "omp";
        case Algorithm::a_omp: return "a-omp";
        case Algorithm::omp_sd: return "omp-sd";
    }
    return "?";
}

// Per-draw design budget for the 200-draw noiseless run; the full design runs in criterion 4.
constexpr int kPerDrawSdIterations = 40;

Verdict criterion1() {
    Verdict v;
    const auto t0 = Clock::now();
    ExperimentConfig cfg;
    cfg.trials = 200;
    cfg.pulse_draw = PulseDraw::per_trial;
    cfg.snr_db = {kNoiseless};
    cfg.sd_options.max_iterations = kPerDrawSdIterations;
    const auto rows = Experiment(cfg).run_all();

    std::map<Algorithm, int> exact;
    std::map<Algorithm, int> cells;
    std::map<Algorithm, double> err_sum;
    std::map<int, std::map<Algorithm, double>> err;
    for (const auto& r : rows) {
        if (r.exact_support && r.relative_l2_error <= 1e-8) ++exact[r.algorithm];
        if (r.range_cells) ++cells[r.algorithm];
        err_sum[r.algorithm] += r.relative_l2_error;
        err[r.trial][r.algorithm] = r.relative_l2_error;
    }
    for (Algorithm a : {Algorithm::omp, Algorithm::omp_sd}) {
        const double rate = exact[a] / 200.0;
        v.require(rate >= 0.95, fmtn("%s exact support with error <= 1e-8 on %d/200 draws (%.1f%%, need >= 95%%)",
                                     name(a), exact[a], 100.0 * rate));
    }
    int larger = 0;
    for (const auto& [t, e] : err)
        if (e.at(Algorithm::a_omp) > std::max(e.at(Algorithm::omp), e.at(Algorithm::omp_sd))) ++larger;
    const double m_omp = err_sum[Algorithm::omp] / 200, m_sd = err_sum[Algorithm::omp_sd] / 200,
                 m_a = err_sum[Algorithm::a_omp] / 200;
    v.require(m_a > m_omp && m_a > m_sd,
              fmtn("mean relative error a-omp %.4f > omp %.4f and omp-sd %.4f", m_a, m_omp, m_sd));
    v.info(fmtn("a-omp error strictly larger than both on %d/200 draws", larger));
    for (Algorithm a : {Algorithm::omp, Algorithm::a_omp, Algorithm::omp_sd})
        v.info(fmtn("%s range cells correct on %d/200 draws", name(a), cells[a]));
    const double dt = seconds_since(t0);
    v.require(dt < 120.0, fmtn("runtime %.1f s (< 120 s) with a %d-iteration design per draw", dt,
                               kPerDrawSdIterations));
    return v;
}

struct Campaign {
    std::unique_ptr<Experiment> exp;
    std::vector<TrialResult> rows;
    BenchReport report;
};

Campaign run_campaign() {
    ExperimentConfig cfg;
    cfg.target.mode = TargetMode::random;
    cfg.trials = 500;
    cfg.snr_db = {5.0, 10.0, 15.0, 20.0, kNoiseless};
    Campaign c;
    c.exp = std::make_unique<Experiment>(cfg);
    c.exp->sensing_for(0);  // design once, outside the timed solves
    c.rows = c.exp->run_all();
    c.report = aggregate(c.rows);
    return c;
}

Verdict criterion2(const Campaign& c) {
    Verdict v;
    const std::vector<double> snrs{5.0, 10.0, 15.0, 20.0, kNoiseless};
    const Algorithm algs[] = {Algorithm::omp, Algorithm::omp_sd, Algorithm::a_omp};
    auto p = [&](Algorithm a, double s) { return c.report.find(a, s)->success_probability; };
    for (Algorithm a : algs) {
        std::string line = std::string(name(a)) + " success (exact support):";
        std::string cells_line = std::string(name(a)) + " range-cell success (information only):";
        bool mono = true;
        for (std::size_t i = 0; i < snrs.size(); ++i) {
            line += fmt(" %.3f", p(a, snrs[i]));
            cells_line += fmt(" %.3f", c.report.find(a, snrs[i])->range_cell_successes / 500.0);
            if (i > 0 && p(a, snrs[i]) < p(a, snrs[i - 1]) - 0.02) mono = false;
        }
        v.require(mono, line + " nondecreasing in SNR (2-pt slack)");
        v.info(cells_line);
    }
    for (double s : {15.0, 20.0}) {
        v.require(p(Algorithm::omp, s) >= p(Algorithm::omp_sd, s) - 0.05 &&
                      p(Algorithm::omp_sd, s) >= p(Algorithm::a_omp, s) - 0.05,
                  fmtn("ordering at %.0f dB: omp %.3f >= omp-sd %.3f >= a-omp %.3f (5-pt slack)", s,
                       p(Algorithm::omp, s), p(Algorithm::omp_sd, s), p(Algorithm::a_omp, s)));
    }
    for (Algorithm a : algs)
        v.require(p(a, 5.0) < 0.30 + 0.10, fmtn("%s at 5 dB: %.3f < 0.30 (10-pt tolerance)", name(a), p(a, 5.0)));
    return v;
}

Verdict criterion3(const Campaign& c) {
    Verdict v;
    const std::map<Algorithm, std::uint64_t> per_iter{
        {Algorithm::omp, 500}, {Algorithm::a_omp, 100}, {Algorithm::omp_sd, 105}};
    std::map<Algorithm, bool> exact{{Algorithm::omp, true}, {Algorithm::a_omp, true}, {Algorithm::omp_sd, true}};
    std::map<Algorithm, double> time;
    for (const auto& r : c.rows) {
        if (r.correlation_count != per_iter.at(r.algorithm) * static_cast<std::uint64_t>(r.iterations))
            exact[r.algorithm] = false;
        if (std::isinf(r.snr_db)) time[r.algorithm] += r.wall_time;
    }
    for (const auto& [a, n] : per_iter)
        v.require(exact[a], fmtn("%s correlations per iteration == %llu on all %zu runs", name(a),
                                 static_cast<unsigned long long>(n), c.rows.size() / 3));
    const double ratio = time[Algorithm::omp] / time[Algorithm::omp_sd];
    v.require(ratio >= 3.0, fmtn("noiseless 500-trial wall time omp %.4f s, omp-sd %.4f s, a-omp %.4f s: ratio %.2f >= 3",
                                 time[Algorithm::omp], time[Algorithm::omp_sd], time[Algorithm::a_omp], ratio));
    return v;
}

Verdict criterion4(const Campaign& c) {
    Verdict v;
    const Dictionary& dict = c.exp->dictionary_for(0);
    const auto blocks = dict.blocks();
    const SensingDictionary& sd = c.exp->sensing_for(0);
    const SdBounds got = evaluate_sd(sd.w, blocks);
    const SdBounds base = evaluate_sd(blocks.front(), blocks);
    v.require(got.b1 <= 0.30, fmt("b1 = %.4f <= 0.30", got.b1));
    v.require(got.b2 <= 0.30, fmt("b2 = %.4f <= 0.30", got.b2));
    v.require(got.objective(0.5) < base.objective(0.5),
              fmtn("b1 + 0.5 b2 = %.4f < %.4f for W = Phi_1 (b1 %.4f, b2 %.4f)", got.objective(0.5),
                   base.objective(0.5), base.b1, base.b2));
    v.info(fmtn("design: %d iterations, stop reason %s", sd.trace.iterations, sd.trace.stop_reason.c_str()));
    const DictionaryCoherence coh = dictionary_coherence(dict);
    const double ref = coh.block_mip[2];
    v.require(ref >= 0.30 && ref <= 0.45, fmt("alpha = 0 block coherence max %.4f in [0.30, 0.45]", ref));
    v.info(fmtn("full MIP %.4f, cross-block off-diagonal max %.4f, mismatched diagonal [%.4f, %.4f]", coh.full_mip,
                coh.cross_block_offdiag_max, coh.mismatched_diag_min, coh.mismatched_diag_max));
    return v;
}

Verdict criterion5() {
    Verdict v;
    const auto t0 = Clock::now();
    const Scenario s = oracle::small_scenario();
    long long instances = 0, mismatches = 0;
    double mip_err = 0.0, sd_err = 0.0;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> amp(0.5, 2.0);
    for (std::uint64_t draw = 0; draw < 6; ++draw) {
        const Dictionary dict = build_dictionary(s, select_pulses(8, 40, draw));
        const ComplexMatrix& a = dict.atoms();
        const auto blocks = dict.blocks();
        SdOptions o;
        o.max_iterations = 100;
        const SensingDictionary designed = design_sd(blocks, 0.5, o);
        SensingDictionary random_w;
        random_w.w = oracle::random_matrix(8, 10, rng);

        mip_err = std::max(mip_err, std::abs(mip(a) - oracle::mip(a)));
        for (const ComplexMatrix* w : std::vector<const ComplexMatrix*>{&designed.w, &random_w.w, &blocks[0]}) {
            const SdBounds g = evaluate_sd(*w, blocks), o2 = oracle::sd_bounds(*w, blocks);
            sd_err = std::max({sd_err, std::abs(g.b1 - o2.b1), std::abs(g.b2 - o2.b2)});
        }

        // every support of size 1 and 2, plus random supports of size 3
        std::vector<std::vector<int>> supports;
        for (int i = 0; i < 20; ++i) {
            supports.push_back({i});
            for (int j = i + 1; j < 20; ++j) supports.push_back({i, j});
        }
        for (int k = 0; k < 60; ++k) {
            std::vector<int> pool(20);
            std::iota(pool.begin(), pool.end(), 0);
            std::shuffle(pool.begin(), pool.end(), rng);
            supports.push_back({pool[0], pool[1], pool[2]});
        }
        for (const auto& sup : supports) {
            ComplexVector y = ComplexVector::Zero(8);
            for (int g : sup) y += amp(rng) * a.col(g);
            const StopRule stop{1e-8 * y.norm(), static_cast<int>(sup.size()) + 1};
            auto cmp = [&](const SparseSolution& got, const oracle::Trace& want) {
                ++instances;
                if (got.support == want.picks) return;
                if (++mismatches <= 5) {
                    std::string line = fmtn("mismatch draw %d, support", static_cast<int>(draw));
                    for (int g : sup) line += " " + std::to_string(g);
                    line += ": solver";
                    for (int g : got.support) line += " " + std::to_string(g);
                    line += " / loop";
                    for (int g : want.picks) line += " " + std::to_string(g);
                    v.info(line);
                }
            };
            cmp(omp(y, dict, stop), oracle::omp(a, y, stop.epsilon, stop.k_max));
            for (int b = 0; b < 2; ++b)
                cmp(a_omp(y, dict, b, stop), oracle::a_omp(a, 10, b, y, stop.epsilon, stop.k_max));
            cmp(omp_sd(y, dict, designed, stop), oracle::omp_sd(a, 10, designed.w, y, stop.epsilon, stop.k_max));
            cmp(omp_sd(y, dict, random_w, stop), oracle::omp_sd(a, 10, random_w.w, y, stop.epsilon, stop.k_max));
        }
    }
    v.require(mismatches == 0, fmtn("per-iteration atom choices agree on %lld/%lld solver runs (M=8, N=10, D=2)",
                                    instances - mismatches, instances));
    v.require(mip_err <= 1e-12, fmt("mip vs pairwise loop: max deviation %.2e <= 1e-12", mip_err));
    v.require(sd_err <= 1e-12, fmt("evaluate_sd vs triple loop: max deviation %.2e <= 1e-12", sd_err));
    const double dt = seconds_since(t0);
    v.require(dt < 30.0, fmt("runtime %.1f s < 30 s", dt));
    return v;
}

Verdict criterion6() {
    Verdict v;
    // residual history and orthogonality at full size with noise
    ExperimentConfig cfg;
    cfg.target.mode = TargetMode::random;
    Experiment ex(cfg);
    const Dictionary& dict = ex.dictionary_for(0);
    SensingDictionary sd;
    sd.w = dict.block(2);
    bool mono = true;
    double ortho = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Target target = ex.target_for(t, dict.num_cells());
        const ComplexVector y = add_awgn(synthesize_echo(dict, target), 15.0, static_cast<std::uint64_t>(t));
        const StopRule stop{0.0, 10};
        for (const auto& sol : {omp(y, dict, stop), a_omp(y, dict, 2, stop), omp_sd(y, dict, sd, stop)}) {
            for (std::size_t i = 1; i < sol.residual_norm_history.size(); ++i)
                if (sol.residual_norm_history[i] > sol.residual_norm_history[i - 1] * (1.0 + 1e-12)) mono = false;
            for (int g : sol.support)
                ortho = std::max(ortho, std::abs(dict.atom(g).dot(sol.residual)) / y.norm());
        }
    }
    v.require(mono, "residual norm history nonincreasing (300 runs)");
    v.require(ortho <= 1e-8, fmt("residual orthogonal to selected atoms: max relative %.2e <= 1e-8", ortho));

    std::mt19937_64 rng(6);
    double idem = 0.0;
    for (int i = 0; i < 20; ++i) {
        const ComplexMatrix n1 = normalize_columns(oracle::random_matrix(12, 7, rng));
        idem = std::max(idem, (normalize_columns(n1) - n1).norm());
    }
    idem = std::max(idem, (normalize_columns(dict.atoms()) - dict.atoms()).norm());
    v.require(idem <= 1e-13, fmt("column normalization idempotent: max change %.2e", idem));

    double cone = 0.0;
    for (int i = 0; i < 200; ++i) {
        const ComplexVector w = oracle::random_matrix(30, 1, rng);
        const ComplexVector p = oracle::random_matrix(30, 1, rng);
        const auto ew = real_embed(w), ep = real_embed(p);
        const Complex want = w.dot(p);
        cone = std::max(cone, std::abs(Complex(ew.tilde.dot(ep.tilde), ew.tilde.dot(ep.hat)) - want) / std::abs(want));
        const double lhs = std::hypot(1.0 - ew.tilde.dot(ep.tilde), ew.tilde.dot(ep.hat));
        cone = std::max(cone, std::abs(lhs - std::abs(1.0 - want)) / std::max(1.0, std::abs(1.0 - want)));
    }
    v.require(cone <= 1e-10, fmt("real second-order-cone embedding identity: max relative error %.2e", cone));

    bool trace_ok = true;
    for (SdMethod m : {SdMethod::smoothed, SdMethod::subgradient}) {
        SdOptions o;
        o.method = m;
        o.max_iterations = 150;
        const auto r = design_sd(dict.blocks(), 0.5, o);
        for (std::size_t i = 1; i < r.trace.objective.size(); ++i)
            if (r.trace.objective[i] > r.trace.objective[i - 1]) trace_ok = false;
    }
    v.require(trace_ok, "design_sd objective trace nonincreasing (smoothed and subgradient)");

    ExperimentConfig small;
    small.target.mode = TargetMode::random;
    small.trials = 20;
    small.snr_db = {10.0, kNoiseless};
    small.sd_options.max_iterations = 50;
    const auto a = Experiment(small).run_all();
    small.threads = 4;
    const auto b = Experiment(small).run_all();
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i)
        same = a[i].trial == b[i].trial && a[i].algorithm == b[i].algorithm && a[i].success == b[i].success &&
               a[i].relative_l2_error == b[i].relative_l2_error && a[i].correlation_count == b[i].correlation_count &&
               a[i].iterations == b[i].iterations;
    v.require(same, "bench results identical across reruns and thread counts under fixed seeds");
    return v;
}

}  // namespace

// Optional arguments select criteria by number; no arguments runs all six.
int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    auto wanted = [&](int id) { return only.empty() || only.count(id) > 0; };
    int failed = 0, ran = 0;
    auto tally = [&](int id, const char* title, const Verdict& v) {
        report(id, title, v);
        ++ran;
        if (!v.pass) ++failed;
    };
    const auto t0 = Clock::now();
    if (wanted(1)) tally(1, "noiseless exact recovery over 200 pulse draws", criterion1());
    if (wanted(2) || wanted(3) || wanted(4)) {
        const Campaign campaign = run_campaign();
        if (wanted(2)) tally(2, "SNR monotonicity and ordering", criterion2(campaign));
        if (wanted(3)) tally(3, "complexity counters and wall-time ratio", criterion3(campaign));
        if (wanted(4)) tally(4, "sensing dictionary design quality", criterion4(campaign));
    }
    if (wanted(5)) tally(5, "oracle equivalence on small instances", criterion5());
    if (wanted(6)) tally(6, "property suite", criterion6());
    std::printf("acceptance: %d of %d criteria failed (%.1f s)\n", failed, ran, seconds_since(t0));
    return failed == 0 ? 0 : 1;
}
