#include "hrrp/sd_design.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace hrrp {

RealEmbedding real_embed(const ComplexVector& v) {
    const Eigen::Index m = v.size();
    RealEmbedding e{RealVector(2 * m), RealVector(2 * m)};
    e.tilde.head(m) = v.real();
    e.tilde.tail(m) = v.imag();
    e.hat.head(m) = v.imag();
    e.hat.tail(m) = -v.real();
    return e;
}

namespace {

void check_blocks(std::span<const ComplexMatrix> blocks) {
    if (blocks.empty()) throw std::invalid_argument("sd: at least one block is required");
    const auto rows = blocks.front().rows();
    const auto cols = blocks.front().cols();
    for (const auto& b : blocks) {
        if (b.rows() != rows || b.cols() != cols)
            throw ShapeError("sd: blocks must share one shape");
    }
}

ComplexMatrix stack_blocks(std::span<const ComplexMatrix> blocks) {
    const auto n = blocks.front().cols();
    ComplexMatrix phi(blocks.front().rows(), n * static_cast<Eigen::Index>(blocks.size()));
    for (std::size_t d = 0; d < blocks.size(); ++d) phi.middleCols(static_cast<Eigen::Index>(d) * n, n) = blocks[d];
    return phi;
}

// Bounds from P = W^H Phi, where column d*N + l of Phi is phi_dl.
SdBounds bounds_from_products(const ComplexMatrix& p, Eigen::Index n) {
    SdBounds b;
    const Eigen::Index d_count = p.cols() / n;
    for (Eigen::Index d = 0; d < d_count; ++d) {
        for (Eigen::Index l = 0; l < n; ++l) {
            const Eigen::Index j = d * n + l;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (k == l) {
                    b.b1 = std::max(b.b1, std::abs(Complex(1.0) - p(k, j)));
                } else {
                    b.b2 = std::max(b.b2, std::abs(p(k, j)));
                }
            }
        }
    }
    return b;
}

// Unit complex direction of z, zero at the origin (a valid subgradient choice of |z|).
inline Complex phase_of(Complex z) {
    const double a = std::abs(z);
    return a > 0.0 ? z / a : Complex(0.0);
}

class SdObjective {
public:
    SdObjective(std::span<const ComplexMatrix> blocks, double gamma, bool per_column)
        : phi_(stack_blocks(blocks)), n_(blocks.front().cols()), gamma_(gamma), per_column_(per_column) {}

    const ComplexMatrix& phi() const { return phi_; }
    Eigen::Index cells() const { return n_; }
    Eigen::Index mechanisms() const { return phi_.cols() / n_; }

    ComplexMatrix products(const ComplexMatrix& w) const { return w.adjoint() * phi_; }

    SdBounds exact(const ComplexMatrix& p) const { return bounds_from_products(p, n_); }

    // Log-sum-exp smoothing of both max terms with width tau. When `coeff` is
    // non-null it receives S (N x DN) such that the real gradient w.r.t. W,
    // written as a complex matrix, is Phi * S^T.
    double smoothed(const ComplexMatrix& p, double tau, ComplexMatrix* coeff) const {
        if (coeff) coeff->setZero(n_, phi_.cols());
        double total = 0.0;
        if (per_column_) {
            for (Eigen::Index k = 0; k < n_; ++k) total += smoothed_rows(p, tau, coeff, k, k + 1);
        } else {
            total = smoothed_rows(p, tau, coeff, 0, n_);
        }
        return total;
    }

    // Averaged subgradient over constraints within `slack` of the exact maxima.
    ComplexMatrix subgradient(const ComplexMatrix& p, const SdBounds& b, double slack) const {
        ComplexMatrix s = ComplexMatrix::Zero(n_, phi_.cols());
        long long diag_active = 0, off_active = 0;
        for (Eigen::Index j = 0; j < phi_.cols(); ++j) {
            const Eigen::Index l = j % n_;
            for (Eigen::Index k = 0; k < n_; ++k) {
                if (k == l) {
                    const Complex e = Complex(1.0) - p(k, j);
                    if (std::abs(e) >= b.b1 - slack && b.b1 > 0.0) ++diag_active;
                } else if (std::abs(p(k, j)) >= b.b2 - slack && b.b2 > 0.0) {
                    ++off_active;
                }
            }
        }
        for (Eigen::Index j = 0; j < phi_.cols(); ++j) {
            const Eigen::Index l = j % n_;
            for (Eigen::Index k = 0; k < n_; ++k) {
                if (k == l) {
                    const Complex e = Complex(1.0) - p(k, j);
                    if (diag_active > 0 && std::abs(e) >= b.b1 - slack)
                        s(k, j) = -std::conj(phase_of(e)) / static_cast<double>(diag_active);
                } else if (off_active > 0 && std::abs(p(k, j)) >= b.b2 - slack) {
                    s(k, j) = gamma_ * std::conj(phase_of(p(k, j))) / static_cast<double>(off_active);
                }
            }
        }
        return s;
    }

    ComplexMatrix gradient(const ComplexMatrix& coeff) const { return phi_ * coeff.transpose(); }

private:
    double smoothed_rows(const ComplexMatrix& p, double tau, ComplexMatrix* coeff, Eigen::Index k0,
                         Eigen::Index k1) const {
        if (k0 == 0 && k1 == n_) return smoothed_all(p, tau, coeff);
        const Eigen::Index d_count = mechanisms();
        double m1 = 0.0, m2 = 0.0;
        for (Eigen::Index k = k0; k < k1; ++k) {
            for (Eigen::Index d = 0; d < d_count; ++d) m1 = std::max(m1, std::abs(Complex(1.0) - p(k, d * n_ + k)));
            for (Eigen::Index j = 0; j < phi_.cols(); ++j)
                if (j % n_ != k) m2 = std::max(m2, std::abs(p(k, j)));
        }
        double s1 = 0.0, s2 = 0.0;
        for (Eigen::Index k = k0; k < k1; ++k) {
            for (Eigen::Index d = 0; d < d_count; ++d) {
                const Eigen::Index j = d * n_ + k;
                const Complex e = Complex(1.0) - p(k, j);
                const double wgt = std::exp((std::abs(e) - m1) / tau);
                s1 += wgt;
                if (coeff) (*coeff)(k, j) = -wgt * std::conj(phase_of(e));
            }
            for (Eigen::Index j = 0; j < phi_.cols(); ++j) {
                if (j % n_ == k) continue;
                const double wgt = std::exp((std::abs(p(k, j)) - m2) / tau);
                s2 += wgt;
                if (coeff) (*coeff)(k, j) = wgt * std::conj(phase_of(p(k, j)));
            }
        }
        if (coeff) {
            for (Eigen::Index k = k0; k < k1; ++k) {
                for (Eigen::Index j = 0; j < phi_.cols(); ++j) {
                    (*coeff)(k, j) *= (j % n_ == k) ? 1.0 / s1 : gamma_ / s2;
                }
            }
        }
        double f = m1 + tau * std::log(s1);
        if (s2 > 0.0) f += gamma_ * (m2 + tau * std::log(s2));
        return f;
    }

    // Joint objective over all rows, vectorized. Diagonal positions are
    // masked out of the off-diagonal term by setting their magnitude to -inf.
    double smoothed_all(const ComplexMatrix& p, double tau, ComplexMatrix* coeff) const {
        const Eigen::Index d_count = mechanisms();
        Eigen::ArrayXXd mag = p.array().abs2().sqrt();
        Eigen::ArrayXXd diag(n_, d_count);
        for (Eigen::Index d = 0; d < d_count; ++d) {
            for (Eigen::Index k = 0; k < n_; ++k) {
                diag(k, d) = std::abs(Complex(1.0) - p(k, d * n_ + k));
                mag(k, d * n_ + k) = -std::numeric_limits<double>::infinity();
            }
        }
        const double m1 = diag.maxCoeff();
        const double m2 = n_ > 1 ? mag.maxCoeff() : 0.0;
        const Eigen::ArrayXXd w1 = ((diag - m1) / tau).exp();
        const Eigen::ArrayXXd w2 = ((mag - m2) / tau).exp();
        const double s1 = w1.sum();
        const double s2 = n_ > 1 ? w2.sum() : 0.0;
        if (coeff) {
            if (s2 > 0.0) {
                // conj(p)/|p| with zero at the origin
                const Eigen::ArrayXXd scale = (gamma_ / s2) * w2 / mag.max(std::numeric_limits<double>::min());
                coeff->array() = p.array().conjugate() * scale.cast<Complex>();
            }
            for (Eigen::Index d = 0; d < d_count; ++d) {
                for (Eigen::Index k = 0; k < n_; ++k) {
                    const Complex e = Complex(1.0) - p(k, d * n_ + k);
                    (*coeff)(k, d * n_ + k) = -(w1(k, d) / s1) * std::conj(phase_of(e));
                }
            }
        }
        double f = m1 + tau * std::log(s1);
        if (s2 > 0.0) f += gamma_ * (m2 + tau * std::log(s2));
        return f;
    }

    ComplexMatrix phi_;
    Eigen::Index n_;
    double gamma_;
    bool per_column_;
};

ComplexMatrix initial_w(std::span<const ComplexMatrix> blocks, SdInit init) {
    switch (init) {
        case SdInit::first_block: return blocks.front();
        case SdInit::zero: return ComplexMatrix::Zero(blocks.front().rows(), blocks.front().cols());
        case SdInit::mean_block: {
            ComplexMatrix w = ComplexMatrix::Zero(blocks.front().rows(), blocks.front().cols());
            for (const auto& b : blocks) w += b;
            return w / static_cast<double>(blocks.size());
        }
    }
    return blocks.front();
}

bool stalled(const std::vector<double>& history, std::size_t since, int patience, double tol) {
    if (history.size() < since + static_cast<std::size_t>(patience) + 1) return false;
    const double before = history[history.size() - 1 - static_cast<std::size_t>(patience)];
    const double now = history.back();
    return before - now <= tol * std::max(std::abs(before), std::numeric_limits<double>::min());
}

void run_smoothed(const SdObjective& obj, const SdOptions& opts, double gamma, ComplexMatrix& best_w,
                  SdBounds& best, SdTrace& trace) {
    ComplexMatrix w = best_w;
    ComplexMatrix y = w;
    double tau = opts.initial_smoothing;
    double lipschitz = 1.0 / tau;
    double momentum = 1.0;
    double f_w = obj.smoothed(obj.products(w), tau, nullptr);
    std::size_t stage_start = 0;
    ComplexMatrix coeff;

    for (int it = 1; it <= opts.max_iterations; ++it) {
        const ComplexMatrix p_y = obj.products(y);
        const double f_y = obj.smoothed(p_y, tau, &coeff);
        const ComplexMatrix grad = obj.gradient(coeff);
        const double g2 = grad.squaredNorm();

        ComplexMatrix w_next;
        ComplexMatrix p_next;
        double f_next = 0.0;
        for (int bt = 0; bt < 60; ++bt) {
            w_next = y - grad / lipschitz;
            p_next = obj.products(w_next);
            f_next = obj.smoothed(p_next, tau, nullptr);
            if (f_next <= f_y - 0.5 * g2 / lipschitz + 1e-12 * std::abs(f_y)) break;
            lipschitz *= 2.0;
        }

        const SdBounds cand = obj.exact(p_next);
        if (cand.objective(gamma) < best.objective(gamma)) {
            best = cand;
            best_w = w_next;
        }

        if (f_next > f_w) {
            momentum = 1.0;
            y = w_next;
        } else {
            const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
            y = w_next + ((momentum - 1.0) / next) * (w_next - w);
            momentum = next;
        }
        w = std::move(w_next);
        f_w = f_next;
        lipschitz *= 0.9;

        trace.objective.push_back(best.objective(gamma));
        trace.iterations = it;
        trace.final_step = 1.0 / lipschitz;
        trace.final_smoothing = tau;

        if (best.objective(gamma) <= 1e-15) {
            trace.converged = true;
            trace.stop_reason = "exact";
            return;
        }
        const bool at_floor = tau <= opts.min_smoothing * (1.0 + 1e-12);
        const bool stage_stalled = stalled(trace.objective, stage_start, opts.patience, opts.tolerance);
        if (at_floor && stage_stalled) {
            trace.converged = true;
            trace.stop_reason = "tolerance";
            return;
        }
        const auto stage_len = trace.objective.size() - 1 - stage_start;
        if (!at_floor && (stage_stalled || stage_len >= static_cast<std::size_t>(opts.stage_length))) {
            tau = std::max(tau * opts.smoothing_decay, opts.min_smoothing);
            w = best_w;
            y = w;
            momentum = 1.0;
            f_w = obj.smoothed(obj.products(w), tau, nullptr);
            stage_start = trace.objective.size() - 1;
        }
    }
    trace.stop_reason = "max-iterations";
}

void run_subgradient(const SdObjective& obj, const SdOptions& opts, double gamma, ComplexMatrix& best_w,
                     SdBounds& best, SdTrace& trace) {
    constexpr double kActiveSlack = 1e-9;
    ComplexMatrix p = obj.products(best_w);
    double step = 1.0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const ComplexMatrix dir = obj.gradient(obj.subgradient(p, best, kActiveSlack));
        if (dir.squaredNorm() == 0.0) {
            trace.converged = true;
            trace.stop_reason = "stationary";
            return;
        }
        bool accepted = false;
        double s = 2.0 * step;
        for (int bt = 0; bt < 60 && !accepted; ++bt, s *= 0.5) {
            const ComplexMatrix cand_w = best_w - s * dir;
            const ComplexMatrix cand_p = obj.products(cand_w);
            const SdBounds cand = obj.exact(cand_p);
            if (cand.objective(gamma) < best.objective(gamma)) {
                best = cand;
                best_w = cand_w;
                p = cand_p;
                step = s;
                accepted = true;
            }
        }
        trace.iterations = it;
        trace.final_step = step;
        trace.objective.push_back(best.objective(gamma));
        if (!accepted) {
            trace.stop_reason = "stalled";
            return;
        }
        if (stalled(trace.objective, 0, opts.patience, opts.tolerance)) {
            trace.converged = true;
            trace.stop_reason = "tolerance";
            return;
        }
    }
    trace.stop_reason = "max-iterations";
}

}  // namespace

SdBounds evaluate_sd(const ComplexMatrix& w, std::span<const ComplexMatrix> blocks) {
    check_blocks(blocks);
    if (w.rows() != blocks.front().rows() || w.cols() != blocks.front().cols()) {
        throw ShapeError("evaluate_sd: W is " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                         ", blocks are " + std::to_string(blocks.front().rows()) + "x" +
                         std::to_string(blocks.front().cols()));
    }
    const ComplexMatrix phi = stack_blocks(blocks);
    return bounds_from_products(w.adjoint() * phi, w.cols());
}

std::uint64_t blocks_digest(std::span<const ComplexMatrix> blocks) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const void* data, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& b : blocks) {
        const std::int64_t dims[2] = {b.rows(), b.cols()};
        mix(dims, sizeof dims);
        mix(b.data(), sizeof(Complex) * static_cast<std::size_t>(b.size()));
    }
    return h;
}

SensingDictionary design_sd(std::span<const ComplexMatrix> blocks, double gamma, const SdOptions& opts) {
    check_blocks(blocks);
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("design_sd: gamma must be positive");
    if (opts.max_iterations < 0 || opts.patience < 1 || !(opts.tolerance >= 0.0))
        throw std::invalid_argument("design_sd: invalid solver options");
    if (!(opts.initial_smoothing > 0.0) || !(opts.min_smoothing > 0.0) || !(opts.smoothing_decay > 0.0) ||
        !(opts.smoothing_decay < 1.0))
        throw std::invalid_argument("design_sd: invalid smoothing schedule");
    for (const auto& b : blocks) {
        for (Eigen::Index c = 0; c < b.cols(); ++c) {
            if (std::abs(b.col(c).norm() - 1.0) > 1e-9)
                throw std::invalid_argument("design_sd: block columns must have unit norm");
        }
    }

    const SdObjective obj(blocks, gamma, opts.per_column);
    SensingDictionary sd;
    sd.gamma = gamma;
    sd.design_inputs_digest = blocks_digest(blocks);

    ComplexMatrix best_w = initial_w(blocks, opts.init);
    SdBounds best = obj.exact(obj.products(best_w));
    sd.trace.objective.push_back(best.objective(gamma));

    if (opts.max_iterations == 0) {
        sd.trace.stop_reason = "max-iterations";
    } else if (opts.method == SdMethod::smoothed) {
        run_smoothed(obj, opts, gamma, best_w, best, sd.trace);
    } else {
        run_subgradient(obj, opts, gamma, best_w, best, sd.trace);
    }
    sd.w = std::move(best_w);
    sd.b1 = best.b1;
    sd.b2 = best.b2;
    return sd;
}

std::string to_string(SdInit v) {
    switch (v) {
        case SdInit::first_block: return "first-block";
        case SdInit::mean_block: return "mean-block";
        case SdInit::zero: return "zero";
    }
    return "unknown";
}

std::string to_string(SdMethod v) {
    return v == SdMethod::smoothed ? "smoothed" : "subgradient";
}

SdInit sd_init_from_string(const std::string& s) {
    if (s == "first-block") return SdInit::first_block;
    if (s == "mean-block") return SdInit::mean_block;
    if (s == "zero") return SdInit::zero;
    throw std::invalid_argument("unknown SD initialization '" + s + "'");
}

SdMethod sd_method_from_string(const std::string& s) {
    if (s == "smoothed") return SdMethod::smoothed;
    if (s == "subgradient") return SdMethod::subgradient;
    throw std::invalid_argument("unknown SD method '" + s + "'");
}

}  // namespace hrrp
