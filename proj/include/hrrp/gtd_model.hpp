#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hrrp/numerics.hpp"

namespace hrrp {

// Propagation speed used for range bookkeeping (radar convention, 3e8 m/s).
inline constexpr double kSpeedOfLight = 3.0e8;

/// Stepped-frequency radar scenario with a GTD multi-mechanism target model.
/// Carrier of pulse m is f0 + m * delta_f.
struct Scenario {
    double f0 = 1.0e9;
    double delta_f = 10.0e6;
    int num_pulses = 300;
    double range_gate_start = 0.0;
    double target_length = 5.0;
    std::vector<double> mechanisms{-1.0, -0.5, 0.0, 0.5, 1.0};
    // One complex amplitude per mechanism. Empty means aligned_amplitudes().
    std::vector<Complex> amplitudes;

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    int num_mechanisms() const { return static_cast<int>(mechanisms.size()); }
    int num_cells() const;

    /// Amplitude G_d actually used for block d.
    Complex amplitude(int d) const;

    /// Unit-modulus amplitudes j^(-alpha_d): they cancel the constant phase of
    /// the GTD factor so every block shares the same phase reference.
    std::vector<Complex> aligned_amplitudes() const;
};

struct RangeResolution {
    double delta_r;  ///< range cell size, m
    double delta_R;  ///< ambiguous range, m
    int num_cells;
};

/// delta_r = c/(2 M delta_f), delta_R = c/(2 delta_f), N = L0 / delta_r.
RangeResolution range_resolution(const Scenario& s);

struct Scatterer {
    int cell = 0;
    int mechanism = 0;
    double intensity = 1.0;
};

struct Target {
    std::vector<Scatterer> scatterers;

    int sparsity() const { return static_cast<int>(scatterers.size()); }
    void validate(int num_cells, int num_mechanisms, int num_measurements) const;
    /// Dense ground truth over all D*N global indices (index d*N + n).
    RealVector dense(int num_cells, int num_mechanisms) const;
    std::vector<int> global_support(int num_cells) const;
};

/// Scatterers at 0.3, 0.85, 2.0, 3.25 and 4.0 m with equal unit intensity,
/// mechanism i assigned to scatterer i (cycled if fewer mechanisms exist).
Target reference_target(const Scenario& s);

/// Block dictionary Phi = [Phi_1 | ... | Phi_D] restricted to the retained pulses.
/// Stored as one M_meas x (D*N) matrix with unit-norm columns; block d occupies
/// columns [d*N, (d+1)*N).
class Dictionary {
public:
    Dictionary(Scenario scenario, std::vector<int> retained_pulses, ComplexMatrix atoms,
               RealVector column_norms);

    const Scenario& scenario() const noexcept { return scenario_; }
    const std::vector<int>& retained_pulses() const noexcept { return retained_; }
    const ComplexMatrix& atoms() const noexcept { return atoms_; }
    const RealVector& column_norm_factors() const noexcept { return norms_; }

    int rows() const { return static_cast<int>(atoms_.rows()); }
    int num_cells() const noexcept { return num_cells_; }
    int num_mechanisms() const noexcept { return num_mechanisms_; }
    int num_atoms() const { return num_cells_ * num_mechanisms_; }
    double cell_size() const noexcept { return delta_r_; }

    auto block(int d) const { return atoms_.middleCols(static_cast<Eigen::Index>(d) * num_cells_, num_cells_); }
    std::vector<ComplexMatrix> blocks() const;
    auto atom(int global) const { return atoms_.col(global); }

    int global_index(int mechanism, int cell) const { return mechanism * num_cells_ + cell; }
    int mechanism_of(int global) const { return global / num_cells_; }
    int cell_of(int global) const { return global % num_cells_; }

private:
    Scenario scenario_;
    std::vector<int> retained_;
    ComplexMatrix atoms_;
    RealVector norms_;
    int num_cells_;
    int num_mechanisms_;
    double delta_r_;
};

/// Raw (unnormalized) dictionary entry for pulse index m and cell n of block d.
Complex dictionary_entry(const Scenario& s, int d, int pulse, int cell);

Dictionary build_dictionary(const Scenario& s, std::optional<std::vector<int>> pulse_subset = std::nullopt);

/// y = Phi_raw x: normalized atoms weighted by intensity * column norm. Noiseless.
ComplexVector synthesize_echo(const Dictionary& dict, const Target& t);

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

/// Adds circular complex Gaussian noise with per-sample variance
/// (||signal||^2 / len) / 10^(snr_db/10). snr_db = +inf returns the input.
ComplexVector add_awgn(const ComplexVector& signal, double snr_db, std::uint64_t seed);

/// Per-sample noise variance that add_awgn would use.
double noise_variance(const ComplexVector& signal, double snr_db);

enum class PulseScheme { uniform_random, equispaced, prefix };

std::string to_string(PulseScheme s);
PulseScheme pulse_scheme_from_string(const std::string& name);

std::vector<int> select_pulses(int count, int num_pulses, std::uint64_t seed,
                               PulseScheme scheme = PulseScheme::uniform_random);

struct Measurement {
    ComplexVector samples;
    std::vector<int> retained_pulses;
    double snr_db = kNoiseless;
    std::uint64_t noise_seed = 0;
};

/// Selects the rows of a full-pulse echo that correspond to `pulses`.
ComplexVector subsample(const ComplexVector& full_echo, std::span<const int> pulses);

}  // namespace hrrp
