#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hrrp {

using Complex = std::complex<double>;

// Column-major storage (Eigen default). All public transforms return new values.
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class DegenerateColumnError : public std::invalid_argument {
public:
    explicit DegenerateColumnError(Eigen::Index column)
        : std::invalid_argument("degenerate (zero-norm) column at index " + std::to_string(column)),
          column_(column) {}
    Eigen::Index column() const noexcept { return column_; }

private:
    Eigen::Index column_;
};

class RankDeficiencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Principal branch of (j * base_scale)^exponent, i.e.
/// exp(exponent * ln(base_scale) + j * exponent * pi / 2).
Complex complex_power(double base_scale, double exponent);

/// Returns a copy of `m` with every column scaled to unit l2 norm.
/// Throws DegenerateColumnError for a zero column.
ComplexMatrix normalize_columns(const ComplexMatrix& m);

/// Same as normalize_columns, also reporting the original column norms.
ComplexMatrix normalize_columns(const ComplexMatrix& m, RealVector& norms);

/// Rank tolerance used by ls_solve and IncrementalQr:
/// max(rows, cols) * eps * largest column norm.
double rank_tolerance(Eigen::Index rows, Eigen::Index cols, double largest_column_norm);

/// Least-squares solution of min ||y - a x||_2 via column-pivoted Householder QR.
/// Requires rows >= cols and full column rank.
ComplexVector ls_solve(const ComplexMatrix& a, const ComplexVector& y);

bool all_finite(const ComplexMatrix& m);

/// Orthogonal factorization of a growing set of columns, A = Q R, extended one
/// column at a time with twice-iterated classical Gram-Schmidt. Used by the
/// greedy solvers to keep the projection residual without refactoring.
class IncrementalQr {
public:
    IncrementalQr(Eigen::Index rows, Eigen::Index max_cols);

    /// Appends a column. Returns false (and leaves the factorization unchanged)
    /// if the column is numerically inside the current span.
    bool append(const Eigen::Ref<const ComplexVector>& column);

    Eigen::Index size() const noexcept { return size_; }

    /// y - Q Q^H y: the component of y orthogonal to every appended column.
    ComplexVector project_out(const ComplexVector& y) const;

    /// Solves R x = Q^H y for the current columns.
    ComplexVector solve(const ComplexVector& y) const;

private:
    Eigen::Index rows_;
    Eigen::Index size_ = 0;
    ComplexMatrix q_;
    ComplexMatrix r_;
    double max_column_norm_ = 0.0;
};

}  // namespace hrrp
