#include "hrrp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hrrp {

Complex complex_power(double base_scale, double exponent) {
    if (!(base_scale > 0.0) || !std::isfinite(base_scale)) {
        throw DomainError("complex_power: base_scale must be positive and finite");
    }
    if (!std::isfinite(exponent)) {
        throw DomainError("complex_power: exponent must be finite");
    }
    const double magnitude = std::exp(exponent * std::log(base_scale));
    const double phase = exponent * std::numbers::pi / 2.0;
    return std::polar(magnitude, phase);
}

ComplexMatrix normalize_columns(const ComplexMatrix& m, RealVector& norms) {
    ComplexMatrix out(m.rows(), m.cols());
    norms.resize(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double n = m.col(c).norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw DegenerateColumnError(c);
        }
        norms(c) = n;
        out.col(c) = m.col(c) / n;
    }
    return out;
}

ComplexMatrix normalize_columns(const ComplexMatrix& m) {
    RealVector unused;
    return normalize_columns(m, unused);
}

double rank_tolerance(Eigen::Index rows, Eigen::Index cols, double largest_column_norm) {
    return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() *
           largest_column_norm;
}

ComplexVector ls_solve(const ComplexMatrix& a, const ComplexVector& y) {
    if (a.rows() != y.size()) {
        throw ShapeError("ls_solve: matrix has " + std::to_string(a.rows()) + " rows but vector has " +
                         std::to_string(y.size()) + " entries");
    }
    if (a.cols() == 0 || a.rows() < a.cols()) {
        throw RankDeficiencyError("ls_solve: system needs rows >= cols >= 1");
    }
    double largest = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) largest = std::max(largest, a.col(c).norm());
    const double tol = rank_tolerance(a.rows(), a.cols(), largest);

    Eigen::ColPivHouseholderQR<ComplexMatrix> qr(a);
    const auto& r = qr.matrixQR();
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
        if (std::abs(r(i, i)) <= tol) {
            throw RankDeficiencyError("ls_solve: matrix is rank deficient (pivot " + std::to_string(i) +
                                      " below tolerance)");
        }
    }
    return qr.solve(y);
}

bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

IncrementalQr::IncrementalQr(Eigen::Index rows, Eigen::Index max_cols)
    : rows_(rows), q_(rows, max_cols), r_(ComplexMatrix::Zero(max_cols, max_cols)) {}

bool IncrementalQr::append(const Eigen::Ref<const ComplexVector>& column) {
    if (size_ >= q_.cols() || column.size() != rows_) return false;
    ComplexVector v = column;
    const double in_norm = v.norm();
    ComplexVector coeffs = ComplexVector::Zero(size_);
    if (size_ > 0) {
        auto q = q_.leftCols(size_);
        for (int pass = 0; pass < 2; ++pass) {
            const ComplexVector h = q.adjoint() * v;
            v.noalias() -= q * h;
            coeffs += h;
        }
    }
    const double norm = v.norm();
    const double reference = std::max(max_column_norm_, in_norm);
    // Columns that keep less than sqrt(tol) of their length are treated as dependent.
    if (!(norm > std::sqrt(rank_tolerance(rows_, size_ + 1, reference)) * reference) ||
        size_ + 1 > rows_) {
        return false;
    }
    max_column_norm_ = reference;
    q_.col(size_) = v / norm;
    r_.col(size_).head(size_) = coeffs;
    r_(size_, size_) = norm;
    ++size_;
    return true;
}

ComplexVector IncrementalQr::project_out(const ComplexVector& y) const {
    if (size_ == 0) return y;
    const auto q = q_.leftCols(size_);
    const ComplexVector h = q.adjoint() * y;
    ComplexVector r = y;
    r.noalias() -= q * h;
    return r;
}

ComplexVector IncrementalQr::solve(const ComplexVector& y) const {
    const ComplexVector qty = q_.leftCols(size_).adjoint() * y;
    return r_.topLeftCorner(size_, size_).triangularView<Eigen::Upper>().solve(qty);
}

}  // namespace hrrp
