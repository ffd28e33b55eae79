#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "hrrp/bench.hpp"
#include "hrrp/solvers.hpp"

namespace hrrp {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Options of the `recover` command.
struct RecoverOptions {
    Algorithm algorithm = Algorithm::omp_sd;
    std::optional<double> epsilon;  ///< default: noiseless or AWGN rule from the measurement's snr
    std::optional<int> k_max;       ///< default: M_meas / 2
};

struct RunConfig {
    ExperimentConfig experiment;
    RecoverOptions recover;
};

/// Parses the JSON configuration (comments allowed). Every section is
/// optional; absent keys keep the defaults of ExperimentConfig, which
/// reproduce the stepped-frequency setup used throughout the project.
/// Relative `sd.path` values resolve against `base_dir`.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON rendering of a configuration (used for config echoes).
std::string dump_config(const RunConfig& cfg);

}  // namespace hrrp
