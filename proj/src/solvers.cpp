#include "hrrp/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hrrp {

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::residual_threshold: return "residual-threshold";
        case StopReason::max_sparsity: return "max-sparsity";
        case StopReason::stagnation: return "stagnation";
    }
    return "unknown";
}

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::omp: return "omp";
        case Algorithm::a_omp: return "a-omp";
        case Algorithm::omp_sd: return "omp-sd";
    }
    return "unknown";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "omp") return Algorithm::omp;
    if (s == "a-omp" || s == "a_omp") return Algorithm::a_omp;
    if (s == "omp-sd" || s == "omp_sd") return Algorithm::omp_sd;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

double noiseless_epsilon(const ComplexVector& y) {
    return 1e-8 * y.norm();
}

double awgn_epsilon(int num_measurements, double sigma2) {
    const double m = num_measurements;
    return std::sqrt(m) * std::sqrt(sigma2) * std::sqrt(2.0 * std::log(m));
}

namespace {

// First index whose magnitude is within kTieTolerance (relative) of the largest,
// so exact ties go to the lowest index whatever the rounding.
Eigen::Index argmax_abs(const ComplexVector& c) {
    const double top = c.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < c.size(); ++i)
        if (std::abs(c(i)) >= top * (1.0 - kTieTolerance)) return i;
    return 0;
}

void check_stop(const ComplexVector& y, Eigen::Index rows, const StopRule& stop) {
    if (y.size() != rows)
        throw ShapeError("pursuit: measurement has " + std::to_string(y.size()) + " samples, dictionary has " +
                         std::to_string(rows) + " rows");
    if (!(stop.epsilon >= 0.0)) throw std::invalid_argument("pursuit: epsilon must be nonnegative");
    if (stop.k_max < 0 || stop.k_max > rows)
        throw std::invalid_argument("pursuit: k_max must lie in [0, number of measurements]");
}

// Shared greedy loop. `select(r, count)` returns the column to add and adds the
// number of correlations it spent to `count`; `column(g)` returns atom g.
template <class Select, class Column>
SparseSolution pursue(const ComplexVector& y, const StopRule& stop, Select&& select, Column&& column) {
    SparseSolution sol;
    IncrementalQr qr(y.size(), stop.k_max);
    ComplexVector r = y;
    double rnorm = r.norm();
    sol.residual_norm_history.push_back(rnorm);
    sol.stop_reason = StopReason::max_sparsity;
    if (rnorm <= stop.epsilon) {
        sol.stop_reason = StopReason::residual_threshold;
    } else {
        while (static_cast<int>(sol.support.size()) < stop.k_max) {
            const int g = select(r, sol.correlation_count);
            ++sol.iterations;
            if (std::find(sol.support.begin(), sol.support.end(), g) != sol.support.end() || !qr.append(column(g))) {
                sol.stop_reason = StopReason::stagnation;
                break;
            }
            sol.support.push_back(g);
            r = qr.project_out(y);
            rnorm = r.norm();
            sol.residual_norm_history.push_back(rnorm);
            if (rnorm <= stop.epsilon) {
                sol.stop_reason = StopReason::residual_threshold;
                break;
            }
        }
    }
    if (!sol.support.empty()) {
        const ComplexVector x = qr.solve(y);
        sol.coefficients.assign(x.data(), x.data() + x.size());
    }
    sol.residual = std::move(r);
    return sol;
}

}  // namespace

SparseSolution omp(const ComplexVector& y, const Dictionary& dict, const StopRule& stop) {
    check_stop(y, dict.rows(), stop);
    const auto& atoms = dict.atoms();
    ComplexVector corr(atoms.cols());
    return pursue(
        y, stop,
        [&](const ComplexVector& r, std::uint64_t& count) {
            corr.noalias() = atoms.adjoint() * r;
            count += static_cast<std::uint64_t>(atoms.cols());
            return static_cast<int>(argmax_abs(corr));
        },
        [&](int g) { return atoms.col(g); });
}

SparseSolution a_omp(const ComplexVector& y, const Dictionary& dict, int mechanism, const StopRule& stop) {
    if (mechanism < 0 || mechanism >= dict.num_mechanisms())
        throw std::invalid_argument("a_omp: mechanism index out of range");
    check_stop(y, dict.rows(), stop);
    const auto block = dict.block(mechanism);
    const int offset = mechanism * dict.num_cells();
    ComplexVector corr(block.cols());
    return pursue(
        y, stop,
        [&](const ComplexVector& r, std::uint64_t& count) {
            corr.noalias() = block.adjoint() * r;
            count += static_cast<std::uint64_t>(block.cols());
            return offset + static_cast<int>(argmax_abs(corr));
        },
        [&](int g) { return dict.atom(g); });
}

SparseSolution a_omp(const ComplexVector& y, const ComplexMatrix& block, const StopRule& stop) {
    check_stop(y, block.rows(), stop);
    ComplexVector corr(block.cols());
    return pursue(
        y, stop,
        [&](const ComplexVector& r, std::uint64_t& count) {
            corr.noalias() = block.adjoint() * r;
            count += static_cast<std::uint64_t>(block.cols());
            return static_cast<int>(argmax_abs(corr));
        },
        [&](int g) { return block.col(g); });
}

SparseSolution omp_sd(const ComplexVector& y, const Dictionary& dict, const SensingDictionary& sd,
                      const StopRule& stop) {
    if (sd.w.rows() != dict.rows() || sd.w.cols() != dict.num_cells())
        throw ShapeError("omp_sd: sensing dictionary is " + std::to_string(sd.w.rows()) + "x" +
                         std::to_string(sd.w.cols()) + ", dictionary blocks are " + std::to_string(dict.rows()) +
                         "x" + std::to_string(dict.num_cells()));
    check_stop(y, dict.rows(), stop);
    const int n = dict.num_cells();
    const int d_count = dict.num_mechanisms();
    ComplexVector corr(n);
    ComplexVector group(d_count);
    return pursue(
        y, stop,
        [&](const ComplexVector& r, std::uint64_t& count) {
            corr.noalias() = sd.w.adjoint() * r;
            const int t = static_cast<int>(argmax_abs(corr));
            for (int d = 0; d < d_count; ++d) group(d) = dict.atom(d * n + t).dot(r);
            count += static_cast<std::uint64_t>(n + d_count);
            return static_cast<int>(argmax_abs(group)) * n + t;
        },
        [&](int g) { return dict.atom(g); });
}

std::vector<Complex> recover_amplitudes(const Dictionary& dict, std::span<const int> support, const ComplexVector& y) {
    if (support.empty()) throw std::invalid_argument("recover_amplitudes: empty support");
    ComplexMatrix a(dict.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (support[i] < 0 || support[i] >= dict.num_atoms())
            throw std::invalid_argument("recover_amplitudes: support index out of range");
        a.col(static_cast<Eigen::Index>(i)) = dict.atom(support[i]);
    }
    const ComplexVector x = ls_solve(a, y);
    std::vector<Complex> out(support.size());
    for (std::size_t i = 0; i < support.size(); ++i)
        out[i] = x(static_cast<Eigen::Index>(i)) / dict.column_norm_factors()(support[i]);
    return out;
}

std::vector<Complex> solution_intensities(const Dictionary& dict, const SparseSolution& sol) {
    std::vector<Complex> out(sol.support.size());
    for (std::size_t i = 0; i < sol.support.size(); ++i)
        out[i] = sol.coefficients[i] / dict.column_norm_factors()(sol.support[i]);
    return out;
}

ComplexVector dense_estimate(const Dictionary& dict, const SparseSolution& sol) {
    ComplexVector x = ComplexVector::Zero(dict.num_atoms());
    const auto intensities = solution_intensities(dict, sol);
    for (std::size_t i = 0; i < sol.support.size(); ++i) x(sol.support[i]) += intensities[i];
    return x;
}

Srp reconstruct_srp(const SparseSolution& sol, const Dictionary& dict) {
    const int n = dict.num_cells();
    Srp srp;
    srp.range_axis.resize(static_cast<std::size_t>(n));
    srp.magnitude.assign(static_cast<std::size_t>(n), 0.0);
    srp.mechanisms.assign(static_cast<std::size_t>(n), {});
    for (int i = 0; i < n; ++i) srp.range_axis[static_cast<std::size_t>(i)] = i * dict.cell_size();
    const auto intensities = solution_intensities(dict, sol);
    for (std::size_t i = 0; i < sol.support.size(); ++i) {
        const int g = sol.support[i];
        if (g < 0 || g >= dict.num_atoms()) throw std::out_of_range("reconstruct_srp: support index out of range");
        const auto cell = static_cast<std::size_t>(dict.cell_of(g));
        srp.magnitude[cell] += std::abs(intensities[i]);
        auto& labels = srp.mechanisms[cell];
        labels.insert(std::upper_bound(labels.begin(), labels.end(), dict.mechanism_of(g)), dict.mechanism_of(g));
    }
    return srp;
}

}  // namespace hrrp
