#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hrrp/numerics.hpp"

namespace hrrp {

/// Real second-order-cone view of a complex vector v:
/// tilde = [Re v; Im v], hat = [Im v; -Re v]. For any complex w,
/// w^H v = tilde(w)^T tilde(v) + j * tilde(w)^T hat(v).
struct RealEmbedding {
    RealVector tilde;
    RealVector hat;
};

RealEmbedding real_embed(const ComplexVector& v);

/// Bounds reached by a sensing matrix W against mechanism blocks Phi_d:
///   b1 = max_{d,l} |1 - w_l^H phi_dl|
///   b2 = max_{d,k != l} |w_k^H phi_dl|
struct SdBounds {
    double b1 = 0.0;
    double b2 = 0.0;
    double objective(double gamma) const { return b1 + gamma * b2; }
};

SdBounds evaluate_sd(const ComplexMatrix& w, std::span<const ComplexMatrix> blocks);

enum class SdInit { first_block, mean_block, zero };
enum class SdMethod {
    smoothed,    ///< log-sum-exp smoothing, accelerated gradient, continuation in the smoothing width
    subgradient  ///< averaged active-set subgradient with backtracking on the exact objective
};

std::string to_string(SdInit v);
std::string to_string(SdMethod v);
SdInit sd_init_from_string(const std::string& s);
SdMethod sd_method_from_string(const std::string& s);

struct SdOptions {
    int max_iterations = 5000;
    /// Relative objective improvement below which a stage counts as stalled.
    double tolerance = 1e-6;
    int patience = 50;
    SdInit init = SdInit::first_block;
    SdMethod method = SdMethod::smoothed;
    /// Optimize every column of W against its own row maxima. Cheaper to
    /// converge; its joint objective is an upper bound on the joint optimum.
    bool per_column = false;
    double initial_smoothing = 0.02;
    double min_smoothing = 1e-4;
    double smoothing_decay = 0.6;
    int stage_length = 300;
};

struct SdTrace {
    int iterations = 0;
    /// Objective b1 + gamma*b2 of the incumbent after each iteration; entry 0 is the start point.
    std::vector<double> objective;
    double final_step = 0.0;
    double final_smoothing = 0.0;
    bool converged = false;
    std::string stop_reason;
};

struct SensingDictionary {
    ComplexMatrix w;
    double b1 = 0.0;
    double b2 = 0.0;
    double gamma = 0.5;
    SdTrace trace;
    std::uint64_t design_inputs_digest = 0;

    double objective() const { return b1 + gamma * b2; }
};

/// FNV-1a over block shapes and entries; identifies the dictionary a W was designed for.
std::uint64_t blocks_digest(std::span<const ComplexMatrix> blocks);

/// Designs W (M x N) minimizing b1 + gamma*b2 over all blocks jointly.
/// Non-convergence is reported in trace.converged, never thrown.
SensingDictionary design_sd(std::span<const ComplexMatrix> blocks, double gamma, const SdOptions& opts = {});

}  // namespace hrrp
