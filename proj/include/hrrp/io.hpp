#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrrp/bench.hpp"
#include "hrrp/coherence.hpp"
#include "hrrp/gtd_model.hpp"
#include "hrrp/sd_design.hpp"
#include "hrrp/solvers.hpp"

namespace hrrp {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Sensing dictionary file (text, LF endings):
//
//   hrrp-sd 1
//   rows <M>
//   cols <N>
//   gamma <g>
//   b1 <b1>
//   b2 <b2>
//   iterations <count>
//   converged <0|1>
//   stop_reason <token>
//   final_objective <value>
//   digest <16 hex digits>
//   data
//   <re> <im>        (M*N lines, column-major, %.17g)
//
// Everything after `data` is the matrix payload; reruns of one design produce
// identical payload bytes.
void write_sensing_dictionary(std::ostream& out, const SensingDictionary& sd);
void write_sensing_dictionary(const std::filesystem::path& path, const SensingDictionary& sd);
SensingDictionary read_sensing_dictionary(std::istream& in);
SensingDictionary read_sensing_dictionary(const std::filesystem::path& path);

// Measurement file:
//
//   hrrp-measurement 1
//   count <M_meas>
//   pulses <i_0> <i_1> ... <i_{M_meas-1}>
//   snr_db <value|noiseless>
//   seed <u64>
//   data
//   <re> <im>        (M_meas lines)
void write_measurement(std::ostream& out, const Measurement& m);
void write_measurement(const std::filesystem::path& path, const Measurement& m);
Measurement read_measurement(std::istream& in);
Measurement read_measurement(const std::filesystem::path& path);

std::string format_snr(double snr_db);
double parse_snr(const std::string& token);
std::string hex64(std::uint64_t v);

// CSV files start with a `#schema,<name>,<version>` line followed by a header row.
inline constexpr int kCsvSchemaVersion = 1;

void write_trials_csv(const std::filesystem::path& path, const std::vector<TrialResult>& rows);
std::vector<TrialResult> read_trials_csv(const std::filesystem::path& path);
void write_aggregate_csv(const std::filesystem::path& path, const BenchReport& report);
void write_cde_csv(const std::filesystem::path& path, const BenchReport& report);
void write_timing_csv(const std::filesystem::path& path, const std::vector<TimingRow>& rows);
void write_srp_csv(const std::filesystem::path& path, const Srp& srp);
void write_histogram_csv(const std::filesystem::path& path, const IaiReport& report);

/// Splits one CSV line on commas (no quoting is ever emitted by this module).
std::vector<std::string> split_csv(const std::string& line);

}  // namespace hrrp
