#include "hrrp/gtd_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace hrrp {

void Scenario::validate() const {
    if (!(f0 > 0.0) || !std::isfinite(f0)) throw std::invalid_argument("scenario: f0 must be positive");
    if (!(delta_f > 0.0) || !std::isfinite(delta_f))
        throw std::invalid_argument("scenario: delta_f must be positive");
    if (num_pulses < 2) throw std::invalid_argument("scenario: at least two pulses are required");
    if (!(target_length > 0.0)) throw std::invalid_argument("scenario: target_length must be positive");
    if (!std::isfinite(range_gate_start)) throw std::invalid_argument("scenario: range_gate_start must be finite");
    if (mechanisms.empty()) throw std::invalid_argument("scenario: at least one mechanism is required");
    std::set<double> seen;
    for (double a : mechanisms) {
        if (!std::isfinite(a)) throw std::invalid_argument("scenario: mechanism exponents must be finite");
        if (!seen.insert(a).second) throw std::invalid_argument("scenario: mechanism exponents must be distinct");
    }
    if (!amplitudes.empty() && amplitudes.size() != mechanisms.size())
        throw std::invalid_argument("scenario: need one amplitude per mechanism");
    for (const auto& g : amplitudes) {
        if (!(std::abs(g) > 0.0) || !std::isfinite(g.real()) || !std::isfinite(g.imag()))
            throw std::invalid_argument("scenario: amplitudes must be finite and nonzero");
    }
    const double cells = target_length / (kSpeedOfLight / (2.0 * num_pulses * delta_f));
    if (std::abs(cells - std::round(cells)) > 1e-9 * std::max(1.0, cells) || std::round(cells) < 1.0) {
        throw std::invalid_argument("scenario: target_length / range resolution = " + std::to_string(cells) +
                                    " is not a positive integer");
    }
}

int Scenario::num_cells() const {
    return static_cast<int>(std::lround(target_length / (kSpeedOfLight / (2.0 * num_pulses * delta_f))));
}

std::vector<Complex> Scenario::aligned_amplitudes() const {
    std::vector<Complex> out;
    out.reserve(mechanisms.size());
    for (double a : mechanisms) out.push_back(std::polar(1.0, -a * std::numbers::pi / 2.0));
    return out;
}

Complex Scenario::amplitude(int d) const {
    if (!amplitudes.empty()) return amplitudes.at(static_cast<std::size_t>(d));
    return std::polar(1.0, -mechanisms.at(static_cast<std::size_t>(d)) * std::numbers::pi / 2.0);
}

RangeResolution range_resolution(const Scenario& s) {
    s.validate();
    const double dr = kSpeedOfLight / (2.0 * s.num_pulses * s.delta_f);
    return {dr, kSpeedOfLight / (2.0 * s.delta_f), s.num_cells()};
}

void Target::validate(int num_cells, int num_mechanisms, int num_measurements) const {
    std::set<std::pair<int, int>> seen;
    for (const auto& sc : scatterers) {
        if (sc.cell < 0 || sc.cell >= num_cells)
            throw std::invalid_argument("target: range cell " + std::to_string(sc.cell) + " outside [0, " +
                                        std::to_string(num_cells) + ")");
        if (sc.mechanism < 0 || sc.mechanism >= num_mechanisms)
            throw std::invalid_argument("target: mechanism index " + std::to_string(sc.mechanism) + " out of range");
        if (!(sc.intensity >= 0.0) || !std::isfinite(sc.intensity))
            throw std::invalid_argument("target: intensities must be finite and nonnegative");
        if (!seen.insert({sc.cell, sc.mechanism}).second)
            throw std::invalid_argument("target: duplicate (cell, mechanism) pair");
    }
    if (sparsity() > num_measurements)
        throw std::invalid_argument("target: sparsity exceeds the number of measurements");
}

RealVector Target::dense(int num_cells, int num_mechanisms) const {
    RealVector x = RealVector::Zero(static_cast<Eigen::Index>(num_cells) * num_mechanisms);
    for (const auto& sc : scatterers) x(sc.mechanism * num_cells + sc.cell) = sc.intensity;
    return x;
}

std::vector<int> Target::global_support(int num_cells) const {
    std::vector<int> out;
    for (const auto& sc : scatterers)
        if (sc.intensity > 0.0) out.push_back(sc.mechanism * num_cells + sc.cell);
    std::sort(out.begin(), out.end());
    return out;
}

Target reference_target(const Scenario& s) {
    const auto res = range_resolution(s);
    constexpr double kPositions[] = {0.3, 0.85, 2.0, 3.25, 4.0};
    Target t;
    int i = 0;
    for (double pos : kPositions) {
        const int cell = static_cast<int>(std::lround(pos / res.delta_r));
        if (cell >= res.num_cells) continue;
        t.scatterers.push_back({cell, i % s.num_mechanisms(), 1.0});
        ++i;
    }
    return t;
}

Dictionary::Dictionary(Scenario scenario, std::vector<int> retained_pulses, ComplexMatrix atoms,
                       RealVector column_norms)
    : scenario_(std::move(scenario)),
      retained_(std::move(retained_pulses)),
      atoms_(std::move(atoms)),
      norms_(std::move(column_norms)),
      num_cells_(scenario_.num_cells()),
      num_mechanisms_(scenario_.num_mechanisms()),
      delta_r_(kSpeedOfLight / (2.0 * scenario_.num_pulses * scenario_.delta_f)) {
    if (atoms_.cols() != static_cast<Eigen::Index>(num_cells_) * num_mechanisms_ ||
        atoms_.rows() != static_cast<Eigen::Index>(retained_.size()) || norms_.size() != atoms_.cols()) {
        throw ShapeError("dictionary: inconsistent dimensions");
    }
}

std::vector<ComplexMatrix> Dictionary::blocks() const {
    std::vector<ComplexMatrix> out;
    out.reserve(static_cast<std::size_t>(num_mechanisms_));
    for (int d = 0; d < num_mechanisms_; ++d) out.emplace_back(block(d));
    return out;
}

Complex dictionary_entry(const Scenario& s, int d, int pulse, int cell) {
    const double alpha = s.mechanisms.at(static_cast<std::size_t>(d));
    const double fm = s.f0 + pulse * s.delta_f;
    const Complex gtd = complex_power(1.0 + pulse * s.delta_f / s.f0, alpha);
    const double delay = s.range_gate_start + cell / (s.num_pulses * s.delta_f);
    // Reduce the phase modulo 2*pi in cycles before scaling to keep precision.
    const double cycles = fm * delay;
    const double frac = cycles - std::floor(cycles);
    return s.amplitude(d) * gtd * std::polar(1.0, -2.0 * std::numbers::pi * frac);
}

Dictionary build_dictionary(const Scenario& s, std::optional<std::vector<int>> pulse_subset) {
    s.validate();
    std::vector<int> pulses;
    if (pulse_subset) {
        pulses = std::move(*pulse_subset);
        if (pulses.empty()) throw std::invalid_argument("build_dictionary: empty pulse subset");
        if (!std::is_sorted(pulses.begin(), pulses.end()))
            throw std::invalid_argument("build_dictionary: pulse subset must be sorted");
        if (std::adjacent_find(pulses.begin(), pulses.end()) != pulses.end())
            throw std::invalid_argument("build_dictionary: duplicate pulse index");
        if (pulses.front() < 0 || pulses.back() >= s.num_pulses)
            throw std::invalid_argument("build_dictionary: pulse index out of range");
    } else {
        pulses.resize(static_cast<std::size_t>(s.num_pulses));
        std::iota(pulses.begin(), pulses.end(), 0);
    }
    const int n_cells = s.num_cells();
    const int n_mech = s.num_mechanisms();
    ComplexMatrix raw(static_cast<Eigen::Index>(pulses.size()), static_cast<Eigen::Index>(n_cells) * n_mech);
    for (int d = 0; d < n_mech; ++d)
        for (int n = 0; n < n_cells; ++n)
            for (std::size_t m = 0; m < pulses.size(); ++m)
                raw(static_cast<Eigen::Index>(m), d * n_cells + n) = dictionary_entry(s, d, pulses[m], n);
    RealVector norms;
    ComplexMatrix atoms = normalize_columns(raw, norms);
    return Dictionary(s, std::move(pulses), std::move(atoms), std::move(norms));
}

ComplexVector synthesize_echo(const Dictionary& dict, const Target& t) {
    t.validate(dict.num_cells(), dict.num_mechanisms(), std::numeric_limits<int>::max());
    ComplexVector y = ComplexVector::Zero(dict.rows());
    for (const auto& sc : t.scatterers) {
        const int g = dict.global_index(sc.mechanism, sc.cell);
        y += (sc.intensity * dict.column_norm_factors()(g)) * dict.atom(g);
    }
    return y;
}

double noise_variance(const ComplexVector& signal, double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    if (!std::isfinite(snr_db)) throw DomainError("add_awgn: snr must be finite or +inf");
    const double power = signal.squaredNorm() / static_cast<double>(signal.size());
    if (!(power > 0.0)) throw DomainError("add_awgn: SNR is undefined for a zero signal");
    return power / std::pow(10.0, snr_db / 10.0);
}

ComplexVector add_awgn(const ComplexVector& signal, double snr_db, std::uint64_t seed) {
    const double var = noise_variance(signal, snr_db);
    if (var == 0.0) return signal;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(var / 2.0));
    ComplexVector out = signal;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        out(i) += Complex(re, im);
    }
    return out;
}

std::string to_string(PulseScheme s) {
    switch (s) {
        case PulseScheme::uniform_random: return "uniform-random";
        case PulseScheme::equispaced: return "equispaced";
        case PulseScheme::prefix: return "prefix";
    }
    return "unknown";
}

PulseScheme pulse_scheme_from_string(const std::string& name) {
    if (name == "uniform-random") return PulseScheme::uniform_random;
    if (name == "equispaced") return PulseScheme::equispaced;
    if (name == "prefix") return PulseScheme::prefix;
    throw std::invalid_argument("unknown pulse scheme '" + name + "'");
}

std::vector<int> select_pulses(int count, int num_pulses, std::uint64_t seed, PulseScheme scheme) {
    if (count < 1 || count > num_pulses)
        throw std::invalid_argument("select_pulses: count " + std::to_string(count) + " outside [1, " +
                                    std::to_string(num_pulses) + "]");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count));
    switch (scheme) {
        case PulseScheme::prefix:
            for (int i = 0; i < count; ++i) out.push_back(i);
            break;
        case PulseScheme::equispaced:
            for (int i = 0; i < count; ++i)
                out.push_back(static_cast<int>(static_cast<long long>(i) * num_pulses / count));
            break;
        case PulseScheme::uniform_random: {
            // Partial Fisher-Yates: the first `count` slots are a uniform draw without replacement.
            std::vector<int> pool(static_cast<std::size_t>(num_pulses));
            std::iota(pool.begin(), pool.end(), 0);
            std::mt19937_64 rng(seed);
            for (int i = 0; i < count; ++i) {
                std::uniform_int_distribution<int> pick(i, num_pulses - 1);
                std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
            }
            out.assign(pool.begin(), pool.begin() + count);
            std::sort(out.begin(), out.end());
            break;
        }
    }
    return out;
}

ComplexVector subsample(const ComplexVector& full_echo, std::span<const int> pulses) {
    ComplexVector out(static_cast<Eigen::Index>(pulses.size()));
    for (std::size_t i = 0; i < pulses.size(); ++i) out(static_cast<Eigen::Index>(i)) = full_echo(pulses[i]);
    return out;
}

}  // namespace hrrp
