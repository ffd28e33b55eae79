#include "hrrp/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hrrp {

namespace {

void require_unit_columns(const ComplexMatrix& m, const char* what) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double n = m.col(c).norm();
        if (std::abs(n - 1.0) > 1e-9) {
            throw NormalizationError(std::string(what) + ": column " + std::to_string(c) + " has norm " +
                                     std::to_string(n) + ", expected 1");
        }
    }
}

}  // namespace

Histogram make_histogram(std::span<const double> values, int bins, double lo, double hi) {
    Histogram h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    const double width = (hi - lo) / bins;
    for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + i * width;
    for (double v : values) {
        auto b = static_cast<long long>(std::floor((v - lo) / width));
        b = std::clamp<long long>(b, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

double mip(const ComplexMatrix& atoms) {
    if (atoms.cols() < 2) throw std::invalid_argument("mip: need at least two columns");
    require_unit_columns(atoms, "mip");
    const Eigen::MatrixXd gram = (atoms.adjoint() * atoms).cwiseAbs();
    double best = 0.0;
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
        for (Eigen::Index i = 0; i < gram.rows(); ++i)
            if (i != j) best = std::max(best, gram(i, j));
    return best;
}

double mip(const Dictionary& dict) {
    return mip(dict.atoms());
}

IaiReport iai_stats(const ComplexMatrix& w, std::span<const ComplexMatrix> blocks, int bins) {
    if (blocks.empty()) throw std::invalid_argument("iai_stats: no blocks");
    IaiReport report;
    report.diag_min = std::numeric_limits<double>::infinity();
    std::vector<double> diag_values;
    std::vector<double> off_values;
    double hi = 1.0;
    for (const auto& block : blocks) {
        if (block.rows() != w.rows() || block.cols() != w.cols()) {
            throw ShapeError("iai_stats: shape mismatch " + std::to_string(w.rows()) + "x" +
                             std::to_string(w.cols()) + " vs " + std::to_string(block.rows()) + "x" +
                             std::to_string(block.cols()));
        }
        const Eigen::MatrixXd g = (w.adjoint() * block).cwiseAbs();
        double block_off = 0.0;
        for (Eigen::Index l = 0; l < g.cols(); ++l) {
            for (Eigen::Index k = 0; k < g.rows(); ++k) {
                if (k == l) {
                    report.diag_min = std::min(report.diag_min, g(k, l));
                    diag_values.push_back(g(k, l));
                } else {
                    block_off = std::max(block_off, g(k, l));
                    off_values.push_back(g(k, l));
                }
                hi = std::max(hi, g(k, l));
            }
        }
        report.per_block_offdiag_max.push_back(block_off);
        report.offdiag_max = std::max(report.offdiag_max, block_off);
    }
    report.diag_histogram = make_histogram(diag_values, bins, 0.0, hi);
    report.offdiag_histogram = make_histogram(off_values, bins, 0.0, hi);
    return report;
}

IaiReport iai_stats(const ComplexMatrix& w, const ComplexMatrix& block, int bins) {
    return iai_stats(w, std::span<const ComplexMatrix>(&block, 1), bins);
}

DictionaryCoherence dictionary_coherence(const Dictionary& dict) {
    const int n = dict.num_cells();
    const int d_count = dict.num_mechanisms();
    const Eigen::MatrixXd gram = (dict.atoms().adjoint() * dict.atoms()).cwiseAbs();
    DictionaryCoherence out{};
    out.block_mip.assign(static_cast<std::size_t>(d_count), 0.0);
    out.mismatched_diag_min = d_count > 1 ? std::numeric_limits<double>::infinity() : 0.0;
    for (Eigen::Index j = 0; j < gram.cols(); ++j) {
        for (Eigen::Index i = 0; i < gram.rows(); ++i) {
            if (i == j) continue;
            const double v = gram(i, j);
            out.full_mip = std::max(out.full_mip, v);
            const auto di = static_cast<int>(i / n), dj = static_cast<int>(j / n);
            const auto ci = static_cast<int>(i % n), cj = static_cast<int>(j % n);
            if (di == dj) {
                auto& b = out.block_mip[static_cast<std::size_t>(di)];
                b = std::max(b, v);
            } else if (ci != cj) {
                out.cross_block_offdiag_max = std::max(out.cross_block_offdiag_max, v);
            } else {
                out.mismatched_diag_min = std::min(out.mismatched_diag_min, v);
                out.mismatched_diag_max = std::max(out.mismatched_diag_max, v);
            }
        }
    }
    return out;
}

}  // namespace hrrp
