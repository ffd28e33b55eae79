#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hrrp/gtd_model.hpp"
#include "hrrp/sd_design.hpp"

namespace hrrp {

enum class StopReason { residual_threshold, max_sparsity, stagnation };
std::string to_string(StopReason r);

enum class Algorithm { omp, a_omp, omp_sd };
std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

/// Correlations within this relative distance of the largest count as tied;
/// ties go to the lowest index.
inline constexpr double kTieTolerance = 1e-10;

struct StopRule {
    double epsilon = 0.0;  ///< stop once ||r||_2 <= epsilon
    int k_max = 1;         ///< maximum support size
};

/// Result of a greedy pursuit. Indices are 0-based global dictionary columns
/// g = d*N + n; the 1-based form (xi - 1)*N + t used in the literature maps to
/// g = (xi - 1)*N + (t - 1).
struct SparseSolution {
    std::vector<int> support;               ///< in selection order
    std::vector<Complex> coefficients;      ///< w.r.t. the normalized atoms, aligned with support
    std::vector<double> residual_norm_history;  ///< ||r_i||_2 for i = 0 (= ||y||) .. iterations
    std::uint64_t correlation_count = 0;   ///< length-M inner products spent on atom selection
    int iterations = 0;
    StopReason stop_reason = StopReason::max_sparsity;
    ComplexVector residual;
};

/// epsilon for a noiseless run: 1e-8 * ||y||.
double noiseless_epsilon(const ComplexVector& y);
/// epsilon under AWGN of per-sample variance sigma2: sqrt(M) * sigma * sqrt(2 ln M).
double awgn_epsilon(int num_measurements, double sigma2);

/// Standard OMP: each iteration correlates the residual with all D*N atoms.
SparseSolution omp(const ComplexVector& y, const Dictionary& dict, const StopRule& stop);

/// OMP restricted to the N atoms of mechanism block `mechanism`.
SparseSolution a_omp(const ComplexVector& y, const Dictionary& dict, int mechanism, const StopRule& stop);

/// OMP on a standalone unit-column block; support holds block-local indices.
SparseSolution a_omp(const ComplexVector& y, const ComplexMatrix& block, const StopRule& stop);

/// Two-step selection: range cell t = argmax_t |w_t^H r| (N correlations), then
/// mechanism d = argmax_d |phi_dt^H r| (D correlations).
SparseSolution omp_sd(const ComplexVector& y, const Dictionary& dict, const SensingDictionary& sd,
                      const StopRule& stop);

/// Least-squares coefficients of y on the support, divided by the recorded
/// column norms so they are physical scatterer intensities.
std::vector<Complex> recover_amplitudes(const Dictionary& dict, std::span<const int> support, const ComplexVector& y);

/// Physical intensities from a solution's atom coefficients.
std::vector<Complex> solution_intensities(const Dictionary& dict, const SparseSolution& sol);

/// Dense D*N estimate of the intensity vector.
ComplexVector dense_estimate(const Dictionary& dict, const SparseSolution& sol);

struct Srp {
    std::vector<double> range_axis;             ///< n * delta_r, m
    std::vector<double> magnitude;              ///< summed |intensity| per cell
    std::vector<std::vector<int>> mechanisms;   ///< mechanism labels per cell
};

Srp reconstruct_srp(const SparseSolution& sol, const Dictionary& dict);

}  // namespace hrrp
