#include "hrrp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include "hrrp/io.hpp"

namespace hrrp {

std::string to_string(TargetMode m) { return m == TargetMode::fixed ? "fixed" : "random"; }
std::string to_string(PulseDraw m) { return m == PulseDraw::fixed ? "fixed" : "per-trial"; }
std::string to_string(SuccessMode m) { return m == SuccessMode::exact_support ? "exact-support" : "range-cells"; }

TargetMode target_mode_from_string(const std::string& s) {
    if (s == "fixed") return TargetMode::fixed;
    if (s == "random") return TargetMode::random;
    throw std::invalid_argument("unknown target mode '" + s + "'");
}

PulseDraw pulse_draw_from_string(const std::string& s) {
    if (s == "fixed") return PulseDraw::fixed;
    if (s == "per-trial") return PulseDraw::per_trial;
    throw std::invalid_argument("unknown pulse draw '" + s + "'");
}

SuccessMode success_mode_from_string(const std::string& s) {
    if (s == "exact-support") return SuccessMode::exact_support;
    if (s == "range-cells") return SuccessMode::range_cells;
    throw std::invalid_argument("unknown success mode '" + s + "'");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Stream tags keep the pulse, target and noise draws of one trial independent.
constexpr std::uint64_t kPulseStream = 0x70756c7365ull;
constexpr std::uint64_t kTargetStream = 0x746172676574ull;
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ull;

class Fnv {
public:
    template <class T>
    Fnv& add(const T& v) {
        const auto* p = reinterpret_cast<const unsigned char*>(&v);
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            h_ ^= p[i];
            h_ *= 1099511628211ull;
        }
        return *this;
    }
    Fnv& add(const std::string& s) {
        for (char c : s) add(c);
        return add(s.size());
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 14695981039346656037ull;
};

}  // namespace

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x6a09e667f3bcc909ull;
    for (auto w : words) h = splitmix64(h ^ splitmix64(w));
    return h;
}

std::uint64_t snr_key(double snr_db) {
    return std::bit_cast<std::uint64_t>(snr_db);
}

void ExperimentConfig::validate() const {
    scenario.validate();
    if (trials < 1) throw std::invalid_argument("experiment: trials must be at least 1");
    if (snr_db.empty()) throw std::invalid_argument("experiment: snr list is empty");
    for (double s : snr_db)
        if (std::isnan(s) || (std::isinf(s) && s < 0)) throw std::invalid_argument("experiment: invalid snr value");
    if (algorithms.empty()) throw std::invalid_argument("experiment: no algorithms selected");
    if (pulse_count < 1 || pulse_count > scenario.num_pulses)
        throw std::invalid_argument("experiment: pulse_count outside [1, num_pulses]");
    if (threads < 1) throw std::invalid_argument("experiment: threads must be at least 1");
    const int n = scenario.num_cells();
    const int d = scenario.num_mechanisms();
    if (target.mode == TargetMode::random) {
        if (target.sparsity < 1 || target.sparsity > std::min(n, pulse_count))
            throw std::invalid_argument("experiment: random target sparsity out of range");
        if (target.mechanism && (*target.mechanism < 0 || *target.mechanism >= d))
            throw std::invalid_argument("experiment: random target mechanism out of range");
        if (!(target.intensity > 0.0)) throw std::invalid_argument("experiment: intensity must be positive");
    } else if (!target.fixed.scatterers.empty()) {
        target.fixed.validate(n, d, pulse_count);
    }
    if (a_omp_mechanism && (*a_omp_mechanism < 0 || *a_omp_mechanism >= d))
        throw std::invalid_argument("experiment: a-omp mechanism out of range");
    if (k_max && (*k_max < 1 || *k_max > pulse_count))
        throw std::invalid_argument("experiment: k_max outside [1, pulse_count]");
    if (sd_path && pulse_draw == PulseDraw::per_trial)
        throw std::invalid_argument("experiment: a precomputed W needs a fixed pulse draw");
    if (!(sd_gamma > 0.0)) throw std::invalid_argument("experiment: sd gamma must be positive");
}

int ExperimentConfig::a_omp_block() const {
    if (a_omp_mechanism) return *a_omp_mechanism;
    for (int d = 0; d < scenario.num_mechanisms(); ++d)
        if (scenario.mechanisms[static_cast<std::size_t>(d)] == 0.0) return d;
    return 0;
}

std::uint64_t ExperimentConfig::digest() const {
    Fnv h;
    h.add(scenario.f0).add(scenario.delta_f).add(scenario.num_pulses).add(scenario.range_gate_start);
    h.add(scenario.target_length);
    for (double a : scenario.mechanisms) h.add(a);
    for (int d = 0; d < scenario.num_mechanisms(); ++d) {
        const Complex g = scenario.amplitude(d);
        h.add(g.real()).add(g.imag());
    }
    h.add(static_cast<int>(target.mode)).add(target.sparsity).add(target.intensity);
    h.add(target.mechanism.value_or(-1));
    for (const auto& s : target.fixed.scatterers) h.add(s.cell).add(s.mechanism).add(s.intensity);
    h.add(static_cast<int>(pulse_scheme)).add(pulse_count).add(static_cast<int>(pulse_draw));
    for (double s : snr_db) h.add(s);
    h.add(trials).add(master_seed);
    for (auto a : algorithms) h.add(static_cast<int>(a));
    h.add(a_omp_block()).add(k_max.value_or(-1)).add(sd_gamma);
    h.add(sd_options.max_iterations).add(sd_options.tolerance).add(sd_options.patience);
    h.add(static_cast<int>(sd_options.init)).add(static_cast<int>(sd_options.method)).add(sd_options.per_column);
    h.add(sd_options.initial_smoothing).add(sd_options.min_smoothing).add(sd_options.smoothing_decay);
    h.add(sd_options.stage_length);
    h.add(sd_path.value_or(std::string{}));
    h.add(static_cast<int>(success_mode));
    return h.value();
}

struct Experiment::Slot {
    std::once_flag dict_once;
    std::once_flag sd_once;
    std::unique_ptr<Dictionary> dict;
    std::unique_ptr<SensingDictionary> sd;
};

Experiment::Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    digest_ = cfg_.digest();
}

Experiment::~Experiment() = default;

Experiment::Slot& Experiment::slot_for(int trial) const {
    const int key = cfg_.pulse_draw == PulseDraw::fixed ? -1 : trial;
    std::lock_guard lock(mutex_);
    auto& slot = slots_[key];
    if (!slot) slot = std::make_unique<Slot>();
    return *slot;
}

std::vector<int> Experiment::pulses_for(int trial) const {
    const std::uint64_t seed = cfg_.pulse_draw == PulseDraw::fixed
                                   ? derive_seed({cfg_.master_seed, kPulseStream})
                                   : derive_seed({cfg_.master_seed, kPulseStream, static_cast<std::uint64_t>(trial)});
    return select_pulses(cfg_.pulse_count, cfg_.scenario.num_pulses, seed, cfg_.pulse_scheme);
}

Target Experiment::target_for(int trial, int num_cells) const {
    if (cfg_.target.mode == TargetMode::fixed) {
        return cfg_.target.fixed.scatterers.empty() ? reference_target(cfg_.scenario) : cfg_.target.fixed;
    }
    std::mt19937_64 rng(derive_seed({cfg_.master_seed, kTargetStream, static_cast<std::uint64_t>(trial)}));
    std::vector<int> cells(static_cast<std::size_t>(num_cells));
    for (int i = 0; i < num_cells; ++i) cells[static_cast<std::size_t>(i)] = i;
    Target t;
    for (int i = 0; i < cfg_.target.sparsity; ++i) {
        std::uniform_int_distribution<int> pick(i, num_cells - 1);
        std::swap(cells[static_cast<std::size_t>(i)], cells[static_cast<std::size_t>(pick(rng))]);
        int mech = 0;
        if (cfg_.target.mechanism) {
            mech = *cfg_.target.mechanism;
        } else {
            std::uniform_int_distribution<int> pick_mech(0, cfg_.scenario.num_mechanisms() - 1);
            mech = pick_mech(rng);
        }
        t.scatterers.push_back({cells[static_cast<std::size_t>(i)], mech, cfg_.target.intensity});
    }
    return t;
}

const Dictionary& Experiment::dictionary_for(int trial) const {
    Slot& slot = slot_for(trial);
    std::call_once(slot.dict_once, [&] {
        slot.dict = std::make_unique<Dictionary>(build_dictionary(cfg_.scenario, pulses_for(trial)));
    });
    return *slot.dict;
}

const SensingDictionary& Experiment::sensing_for(int trial) const {
    if (std::find(cfg_.algorithms.begin(), cfg_.algorithms.end(), Algorithm::omp_sd) == cfg_.algorithms.end())
        throw std::logic_error("experiment: omp-sd is not enabled");
    const Dictionary& dict = dictionary_for(trial);
    Slot& slot = slot_for(trial);
    std::call_once(slot.sd_once, [&] {
        const auto blocks = dict.blocks();
        if (cfg_.sd_path) {
            auto sd = read_sensing_dictionary(*cfg_.sd_path);
            if (sd.design_inputs_digest != blocks_digest(blocks))
                throw std::invalid_argument("experiment: sensing dictionary " + *cfg_.sd_path +
                                            " was designed for a different dictionary");
            slot.sd = std::make_unique<SensingDictionary>(std::move(sd));
        } else {
            slot.sd = std::make_unique<SensingDictionary>(design_sd(blocks, cfg_.sd_gamma, cfg_.sd_options));
        }
    });
    return *slot.sd;
}

TrialResult Experiment::run_trial(int trial, Algorithm algorithm, double snr_db) const {
    if (trial < 0 || trial >= cfg_.trials) throw std::out_of_range("run_trial: trial index out of range");
    const Dictionary& dict = dictionary_for(trial);
    const Target target = target_for(trial, dict.num_cells());
    const ComplexVector clean = synthesize_echo(dict, target);
    const std::uint64_t noise_seed =
        derive_seed({cfg_.master_seed, kNoiseStream, static_cast<std::uint64_t>(trial), snr_key(snr_db)});
    const ComplexVector y = add_awgn(clean, snr_db, noise_seed);
    const double sigma2 = noise_variance(clean, snr_db);

    StopRule stop;
    stop.epsilon = sigma2 > 0.0 ? awgn_epsilon(dict.rows(), sigma2) : noiseless_epsilon(y);
    stop.k_max = cfg_.k_max.value_or(target.sparsity());

    const SensingDictionary* sd = algorithm == Algorithm::omp_sd ? &sensing_for(trial) : nullptr;

    const auto start = std::chrono::steady_clock::now();
    SparseSolution sol;
    switch (algorithm) {
        case Algorithm::omp: sol = omp(y, dict, stop); break;
        case Algorithm::a_omp: sol = a_omp(y, dict, cfg_.a_omp_block(), stop); break;
        case Algorithm::omp_sd: sol = omp_sd(y, dict, *sd, stop); break;
    }
    const auto stop_time = std::chrono::steady_clock::now();

    TrialResult res;
    res.trial = trial;
    res.algorithm = algorithm;
    res.snr_db = snr_db;
    res.wall_time = std::chrono::duration<double>(stop_time - start).count();
    res.correlation_count = sol.correlation_count;
    res.iterations = sol.iterations;
    res.stop_reason = sol.stop_reason;
    res.config_digest = digest_;

    const auto truth = target.global_support(dict.num_cells());
    std::set<int> recovered(sol.support.begin(), sol.support.end());
    res.exact_support = recovered == std::set<int>(truth.begin(), truth.end());
    std::set<int> true_cells, got_cells;
    for (int g : truth) true_cells.insert(dict.cell_of(g));
    for (int g : sol.support) got_cells.insert(dict.cell_of(g));
    res.range_cells = true_cells == got_cells;
    res.success = cfg_.success_mode == SuccessMode::exact_support ? res.exact_support : res.range_cells;

    const RealVector x = target.dense(dict.num_cells(), dict.num_mechanisms());
    const ComplexVector xhat = dense_estimate(dict, sol);
    res.relative_l2_error = (xhat - x.cast<Complex>()).norm() / x.norm();
    return res;
}

std::vector<TrialResult> Experiment::run_all() const {
    const std::size_t per_trial = cfg_.snr_db.size() * cfg_.algorithms.size();
    std::vector<TrialResult> out(static_cast<std::size_t>(cfg_.trials) * per_trial);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int t = next++; t < cfg_.trials; t = next++) {
            try {
                std::size_t slot = static_cast<std::size_t>(t) * per_trial;
                for (double snr : cfg_.snr_db)
                    for (Algorithm a : cfg_.algorithms) out[slot++] = run_trial(t, a, snr);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cfg_.trials;
            }
        }
    };
    const int width = std::min(cfg_.threads, cfg_.trials);
    if (width <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < width; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

TrialResult run_trial(const ExperimentConfig& cfg, int trial, Algorithm algorithm, double snr_db) {
    return Experiment(cfg).run_trial(trial, algorithm, snr_db);
}

std::vector<double> cde_threshold_grid() {
    std::vector<double> grid;
    for (int k = -48; k <= 4; ++k) grid.push_back(std::pow(10.0, k / 4.0));
    return grid;
}

CdeCurve empirical_cde(std::vector<double> errors) {
    CdeCurve c;
    if (errors.empty()) return c;
    std::sort(errors.begin(), errors.end());
    c.thresholds = cde_threshold_grid();
    const double worst = errors.back();
    if (std::find(c.thresholds.begin(), c.thresholds.end(), worst) == c.thresholds.end()) {
        c.thresholds.insert(std::upper_bound(c.thresholds.begin(), c.thresholds.end(), worst), worst);
    }
    const double total = static_cast<double>(errors.size());
    for (double thr : c.thresholds) {
        const auto below = std::upper_bound(errors.begin(), errors.end(), thr) - errors.begin();
        c.fraction.push_back(static_cast<double>(below) / total);
    }
    return c;
}

const CellSummary* BenchReport::find(Algorithm a, double snr_db) const {
    for (const auto& c : cells)
        if (c.algorithm == a && snr_key(c.snr_db) == snr_key(snr_db)) return &c;
    return nullptr;
}

BenchReport aggregate(const std::vector<TrialResult>& results) {
    if (results.empty()) throw std::invalid_argument("aggregate: no results");
    BenchReport report;
    report.config_digest = results.front().config_digest;
    std::vector<std::vector<double>> errors;
    for (const auto& r : results) {
        if (r.config_digest != report.config_digest)
            throw ConfigMismatchError("aggregate: results come from different experiment configurations");
        auto it = std::find_if(report.cells.begin(), report.cells.end(), [&](const CellSummary& c) {
            return c.algorithm == r.algorithm && snr_key(c.snr_db) == snr_key(r.snr_db);
        });
        if (it == report.cells.end()) {
            CellSummary c;
            c.algorithm = r.algorithm;
            c.snr_db = r.snr_db;
            report.cells.push_back(c);
            errors.emplace_back();
            it = report.cells.end() - 1;
        }
        const auto idx = static_cast<std::size_t>(it - report.cells.begin());
        it->trials += 1;
        it->successes += r.success ? 1 : 0;
        it->exact_support_successes += r.exact_support ? 1 : 0;
        it->range_cell_successes += r.range_cells ? 1 : 0;
        it->total_correlations += r.correlation_count;
        it->total_iterations += r.iterations;
        it->total_seconds += r.wall_time;
        errors[idx].push_back(r.relative_l2_error);
    }
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
        auto& c = report.cells[i];
        c.success_probability = static_cast<double>(c.successes) / c.trials;
        double sum = 0.0;
        for (double e : errors[i]) sum += e;
        c.mean_relative_error = sum / c.trials;
        c.cde = empirical_cde(std::move(errors[i]));
    }
    return report;
}

std::vector<TimingRow> timing_comparison(const std::vector<TrialResult>& results) {
    std::vector<TimingRow> rows;
    for (const auto& r : results) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const TimingRow& t) { return t.algorithm == r.algorithm; });
        if (it == rows.end()) {
            rows.push_back({r.algorithm});
            it = rows.end() - 1;
        }
        it->total_seconds += r.wall_time;
        it->total_correlations += r.correlation_count;
        it->total_iterations += r.iterations;
    }
    for (auto& row : rows) {
        row.correlations_per_iteration =
            row.total_iterations > 0 ? static_cast<double>(row.total_correlations) / row.total_iterations : 0.0;
    }
    return rows;
}

std::vector<TimingRow> timing_comparison(const ExperimentConfig& cfg) {
    for (Algorithm a : {Algorithm::omp, Algorithm::a_omp, Algorithm::omp_sd}) {
        if (std::find(cfg.algorithms.begin(), cfg.algorithms.end(), a) == cfg.algorithms.end())
            throw std::invalid_argument("timing_comparison: all three algorithms must be enabled");
    }
    const Experiment exp(cfg);
    return timing_comparison(exp.run_all());
}

}  // namespace hrrp
