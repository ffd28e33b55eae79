#pragma once

#include <span>
#include <vector>

#include "hrrp/gtd_model.hpp"
#include "hrrp/numerics.hpp"

namespace hrrp {

class NormalizationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Histogram {
    std::vector<double> edges;  // size bins + 1
    std::vector<long long> counts;
};

Histogram make_histogram(std::span<const double> values, int bins, double lo, double hi);

/// Inter-atom interference between a (sensing) matrix and one dictionary block,
/// read off G = w^H * block.
struct IaiReport {
    double diag_min = 0.0;     ///< min_l |G(l,l)|
    double offdiag_max = 0.0;  ///< max_{k != l} |G(k,l)|
    std::vector<double> per_block_offdiag_max;
    Histogram diag_histogram;
    Histogram offdiag_histogram;
};

/// Mutual incoherence max_{i != j} |phi_i^H phi_j| of a unit-column matrix.
double mip(const ComplexMatrix& atoms);
double mip(const Dictionary& dict);

IaiReport iai_stats(const ComplexMatrix& w, const ComplexMatrix& block, int bins = 50);

/// Combined report of w against every block: diag_min and offdiag_max are taken
/// over all blocks, histograms pool all blocks.
IaiReport iai_stats(const ComplexMatrix& w, std::span<const ComplexMatrix> blocks, int bins = 50);

struct DictionaryCoherence {
    double full_mip;                        ///< over all D*N atoms
    std::vector<double> block_mip;          ///< within each mechanism block
    double cross_block_offdiag_max;         ///< max over d != d', k != l of |phi_dk^H phi_d'l|
    double mismatched_diag_min;             ///< min over l, d != d' of |phi_dl^H phi_d'l|
    double mismatched_diag_max;
};

DictionaryCoherence dictionary_coherence(const Dictionary& dict);

}  // namespace hrrp
