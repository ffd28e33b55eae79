#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hrrp/gtd_model.hpp"
#include "hrrp/sd_design.hpp"
#include "hrrp/solvers.hpp"

namespace hrrp {

enum class TargetMode { fixed, random };
enum class PulseDraw { fixed, per_trial };
/// exact_support: recovered global support set equals the true one (mechanisms included).
/// range_cells: only the set of occupied range cells has to match.
enum class SuccessMode { exact_support, range_cells };

std::string to_string(TargetMode m);
std::string to_string(PulseDraw m);
std::string to_string(SuccessMode m);
TargetMode target_mode_from_string(const std::string& s);
PulseDraw pulse_draw_from_string(const std::string& s);
SuccessMode success_mode_from_string(const std::string& s);

struct TargetSpec {
    TargetMode mode = TargetMode::fixed;
    Target fixed;                    ///< used in fixed mode; empty means reference_target()
    int sparsity = 5;                ///< random mode: scatterer count
    double intensity = 1.0;          ///< random mode: common intensity
    std::optional<int> mechanism;    ///< random mode: pin every scatterer to one block
};

struct ExperimentConfig {
    Scenario scenario;
    TargetSpec target;
    PulseScheme pulse_scheme = PulseScheme::uniform_random;
    int pulse_count = 30;
    PulseDraw pulse_draw = PulseDraw::fixed;
    std::vector<double> snr_db{kNoiseless};
    int trials = 500;
    std::uint64_t master_seed = 1;
    std::vector<Algorithm> algorithms{Algorithm::omp, Algorithm::a_omp, Algorithm::omp_sd};
    std::optional<int> a_omp_mechanism;  ///< default: the alpha = 0 block, else block 0
    std::optional<int> k_max;            ///< default: true sparsity
    double sd_gamma = 0.5;
    SdOptions sd_options;
    std::optional<std::string> sd_path;  ///< precomputed W, fixed pulse draw only
    SuccessMode success_mode = SuccessMode::exact_support;
    int threads = 1;

    void validate() const;
    int a_omp_block() const;
    /// Digest of every field that influences trial outcomes (threads excluded).
    std::uint64_t digest() const;
};

struct TrialResult {
    int trial = 0;
    Algorithm algorithm = Algorithm::omp;
    double snr_db = kNoiseless;
    bool success = false;  ///< under the config's success mode
    bool exact_support = false;
    bool range_cells = false;
    double relative_l2_error = 0.0;
    std::uint64_t correlation_count = 0;
    double wall_time = 0.0;
    int iterations = 0;
    StopReason stop_reason = StopReason::max_sparsity;
    std::uint64_t config_digest = 0;
};

/// Seed of an independent stream, a splitmix64 fold of the given words.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words);
std::uint64_t snr_key(double snr_db);

/// Holds one experiment's configuration plus the dictionaries and sensing
/// dictionaries built for it. Safe to call run_trial from several threads.
class Experiment {
public:
    explicit Experiment(ExperimentConfig cfg);
    ~Experiment();
    Experiment(const Experiment&) = delete;
    Experiment& operator=(const Experiment&) = delete;

    const ExperimentConfig& config() const noexcept { return cfg_; }

    std::vector<int> pulses_for(int trial) const;
    Target target_for(int trial, int num_cells) const;
    const Dictionary& dictionary_for(int trial) const;
    /// Throws if omp-sd is not among the configured algorithms.
    const SensingDictionary& sensing_for(int trial) const;

    TrialResult run_trial(int trial, Algorithm algorithm, double snr_db) const;

    /// All (trial, snr, algorithm) combinations on a pool of cfg.threads workers.
    /// Output order is trial-major, then snr, then algorithm, independent of thread count.
    std::vector<TrialResult> run_all() const;

private:
    struct Slot;
    Slot& slot_for(int trial) const;

    ExperimentConfig cfg_;
    std::uint64_t digest_;
    mutable std::mutex mutex_;
    mutable std::map<int, std::unique_ptr<Slot>> slots_;
};

TrialResult run_trial(const ExperimentConfig& cfg, int trial, Algorithm algorithm, double snr_db);

struct CdeCurve {
    std::vector<double> thresholds;
    std::vector<double> fraction;  ///< share of trials with error <= threshold
};

/// Log-spaced thresholds 1e-12 .. 10 (four per decade).
std::vector<double> cde_threshold_grid();
CdeCurve empirical_cde(std::vector<double> errors);

struct CellSummary {
    Algorithm algorithm = Algorithm::omp;
    double snr_db = kNoiseless;
    int trials = 0;
    int successes = 0;
    int exact_support_successes = 0;
    int range_cell_successes = 0;
    double success_probability = 0.0;
    std::uint64_t total_correlations = 0;
    long long total_iterations = 0;
    double total_seconds = 0.0;
    double mean_relative_error = 0.0;
    CdeCurve cde;
};

struct BenchReport {
    std::uint64_t config_digest = 0;
    std::vector<CellSummary> cells;

    const CellSummary* find(Algorithm a, double snr_db) const;
};

class ConfigMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

BenchReport aggregate(const std::vector<TrialResult>& results);

struct TimingRow {
    Algorithm algorithm = Algorithm::omp;
    double total_seconds = 0.0;
    std::uint64_t total_correlations = 0;
    long long total_iterations = 0;
    double correlations_per_iteration = 0.0;
};

std::vector<TimingRow> timing_comparison(const std::vector<TrialResult>& results);
std::vector<TimingRow> timing_comparison(const ExperimentConfig& cfg);

}  // namespace hrrp
