#pragma once

// Brute-force reference implementations. Deliberately naive: explicit loops,
// no shared code with the library beyond the data types.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hrrp/gtd_model.hpp"
#include "hrrp/sd_design.hpp"

namespace oracle {

using hrrp::Complex;
using hrrp::ComplexMatrix;
using hrrp::ComplexVector;

// Unnormalized GTD atom entry straight from the model formula.
inline Complex gtd_entry(const hrrp::Scenario& s, int d, int pulse, int cell) {
    const double alpha = s.mechanisms[static_cast<std::size_t>(d)];
    const double f = s.f0 + pulse * s.delta_f;
    const Complex g = s.amplitude(d);
    const Complex factor = std::pow(Complex(0.0, f / s.f0), alpha);
    const double tau = s.range_gate_start + cell / (s.num_pulses * s.delta_f);
    return g * factor * std::exp(Complex(0.0, -2.0 * std::numbers::pi * f * tau));
}

inline ComplexMatrix raw_dictionary(const hrrp::Scenario& s, const std::vector<int>& pulses) {
    const int n = s.num_cells();
    const int dn = n * s.num_mechanisms();
    ComplexMatrix a(static_cast<Eigen::Index>(pulses.size()), dn);
    for (std::size_t m = 0; m < pulses.size(); ++m)
        for (int d = 0; d < s.num_mechanisms(); ++d)
            for (int c = 0; c < n; ++c) a(static_cast<Eigen::Index>(m), d * n + c) = gtd_entry(s, d, pulses[m], c);
    return a;
}

inline Complex inner(const ComplexMatrix& a, Eigen::Index i, const ComplexMatrix& b, Eigen::Index j) {
    Complex s = 0.0;
    for (Eigen::Index m = 0; m < a.rows(); ++m) s += std::conj(a(m, i)) * b(m, j);
    return s;
}

inline Complex inner(const ComplexMatrix& a, Eigen::Index i, const ComplexVector& v) {
    Complex s = 0.0;
    for (Eigen::Index m = 0; m < a.rows(); ++m) s += std::conj(a(m, i)) * v(m);
    return s;
}

inline double mip(const ComplexMatrix& a) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < a.cols(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j) best = std::max(best, std::abs(inner(a, i, a, j)));
    return best;
}

// b1 = max |1 - w_l^H phi_dl|, b2 = max_{k != l} |w_k^H phi_dl|.
inline hrrp::SdBounds sd_bounds(const ComplexMatrix& w, const std::vector<ComplexMatrix>& blocks) {
    hrrp::SdBounds b;
    for (const auto& phi : blocks)
        for (Eigen::Index k = 0; k < w.cols(); ++k)
            for (Eigen::Index l = 0; l < phi.cols(); ++l) {
                const Complex p = inner(w, k, phi, l);
                if (k == l)
                    b.b1 = std::max(b.b1, std::abs(1.0 - p));
                else
                    b.b2 = std::max(b.b2, std::abs(p));
            }
    return b;
}

struct Trace {
    std::vector<int> picks;
    ComplexVector residual;
};

// Least-squares residual of y on the given columns, solved from scratch.
inline ComplexVector ls_residual(const ComplexMatrix& atoms, const std::vector<int>& support, const ComplexVector& y) {
    ComplexMatrix a(atoms.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) a.col(static_cast<Eigen::Index>(i)) = atoms.col(support[i]);
    const ComplexVector x = a.completeOrthogonalDecomposition().solve(y);
    return y - a * x;
}

// Greedy loop: `choose(r)` returns the next column. Stops on epsilon, k_max or a repeated pick.
template <class Choose>
Trace greedy(const ComplexMatrix& atoms, const ComplexVector& y, double epsilon, int k_max, Choose&& choose) {
    Trace t;
    t.residual = y;
    while (static_cast<int>(t.picks.size()) < k_max && t.residual.norm() > epsilon) {
        const int g = choose(t.residual);
        if (std::find(t.picks.begin(), t.picks.end(), g) != t.picks.end()) break;
        t.picks.push_back(g);
        t.residual = ls_residual(atoms, t.picks, y);
    }
    return t;
}

// Largest |<a_c, r>| over `columns`; values within 1e-10 (relative) of the top are
// tied and the first listed column wins.
inline int argmax_over(const ComplexMatrix& a, const std::vector<int>& columns, const ComplexVector& r) {
    double top = 0.0;
    for (int c : columns) top = std::max(top, std::abs(inner(a, c, r)));
    for (int c : columns)
        if (std::abs(inner(a, c, r)) >= top * (1.0 - 1e-10)) return c;
    return columns.front();
}

inline Trace omp(const ComplexMatrix& atoms, const ComplexVector& y, double eps, int k_max) {
    std::vector<int> all(static_cast<std::size_t>(atoms.cols()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return greedy(atoms, y, eps, k_max, [&](const ComplexVector& r) { return argmax_over(atoms, all, r); });
}

inline Trace a_omp(const ComplexMatrix& atoms, int n, int block, const ComplexVector& y, double eps, int k_max) {
    std::vector<int> cols;
    for (int c = 0; c < n; ++c) cols.push_back(block * n + c);
    return greedy(atoms, y, eps, k_max, [&](const ComplexVector& r) { return argmax_over(atoms, cols, r); });
}

inline Trace omp_sd(const ComplexMatrix& atoms, int n, const ComplexMatrix& w, const ComplexVector& y, double eps,
                    int k_max) {
    const int d_count = static_cast<int>(atoms.cols()) / n;
    std::vector<int> cells(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) cells[static_cast<std::size_t>(c)] = c;
    return greedy(atoms, y, eps, k_max, [&](const ComplexVector& r) {
        const int t = argmax_over(w, cells, r);
        std::vector<int> group;
        for (int d = 0; d < d_count; ++d) group.push_back(d * n + t);
        return argmax_over(atoms, group, r);
    });
}

inline ComplexMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    ComplexMatrix a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = Complex(g(rng), g(rng));
    return a;
}

// Small GTD scenario: 40 pulses at 10 MHz, 3.75 m target, so N = 10.
inline hrrp::Scenario small_scenario(std::vector<double> mechanisms = {-0.5, 0.5}) {
    hrrp::Scenario s;
    s.num_pulses = 40;
    s.target_length = 3.75;
    s.mechanisms = std::move(mechanisms);
    return s;
}

}  // namespace oracle
