#include "hrrp/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace hrrp {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return in;
}

// Reads `key value...` header lines until `data`.
std::map<std::string, std::string> read_header(std::istream& in, const std::string& magic) {
    std::string line;
    if (!std::getline(in, line) || line != magic + " 1")
        throw FormatError("expected header '" + magic + " 1'");
    std::map<std::string, std::string> fields;
    while (std::getline(in, line)) {
        if (line == "data") return fields;
        if (line.empty()) continue;
        const auto sp = line.find(' ');
        if (sp == std::string::npos) throw FormatError("malformed header line '" + line + "'");
        fields[line.substr(0, sp)] = line.substr(sp + 1);
    }
    throw FormatError("missing 'data' marker");
}

const std::string& field(const std::map<std::string, std::string>& f, const std::string& key) {
    const auto it = f.find(key);
    if (it == f.end()) throw FormatError("missing header field '" + key + "'");
    return it->second;
}

double to_double(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw FormatError("trailing characters in number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw FormatError("invalid number '" + s + "'");
    }
}

long long to_int(const std::string& s) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw FormatError("trailing characters in integer '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw FormatError("invalid integer '" + s + "'");
    }
}

std::uint64_t to_u64(const std::string& s, int base = 10) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used, base);
        if (used != s.size()) throw FormatError("trailing characters in integer '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw FormatError("invalid integer '" + s + "'");
    }
}

std::vector<Complex> read_pairs(std::istream& in, long long count) {
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(count));
    std::string line;
    while (static_cast<long long>(out.size()) < count && std::getline(in, line)) {
        std::istringstream ss(line);
        std::string re, im, extra;
        if (!(ss >> re >> im) || (ss >> extra)) throw FormatError("expected '<re> <im>' but got '" + line + "'");
        out.emplace_back(to_double(re), to_double(im));
    }
    if (static_cast<long long>(out.size()) != count)
        throw FormatError("expected " + std::to_string(count) + " samples, found " + std::to_string(out.size()));
    long long found = count;
    while (std::getline(in, line))
        if (!line.empty()) ++found;
    if (found != count)
        throw FormatError("expected " + std::to_string(count) + " samples, found " + std::to_string(found));
    return out;
}

}  // namespace

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

std::string format_snr(double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return "noiseless";
    return num(snr_db);
}

double parse_snr(const std::string& token) {
    if (token == "noiseless" || token == "inf") return kNoiseless;
    return to_double(token);
}

void write_sensing_dictionary(std::ostream& out, const SensingDictionary& sd) {
    out << "hrrp-sd 1\n";
    out << "rows " << sd.w.rows() << "\n";
    out << "cols " << sd.w.cols() << "\n";
    out << "gamma " << num(sd.gamma) << "\n";
    out << "b1 " << num(sd.b1) << "\n";
    out << "b2 " << num(sd.b2) << "\n";
    out << "iterations " << sd.trace.iterations << "\n";
    out << "converged " << (sd.trace.converged ? 1 : 0) << "\n";
    out << "stop_reason " << (sd.trace.stop_reason.empty() ? "none" : sd.trace.stop_reason) << "\n";
    out << "final_objective " << num(sd.objective()) << "\n";
    out << "digest " << hex64(sd.design_inputs_digest) << "\n";
    out << "data\n";
    for (Eigen::Index c = 0; c < sd.w.cols(); ++c)
        for (Eigen::Index r = 0; r < sd.w.rows(); ++r)
            out << num(sd.w(r, c).real()) << ' ' << num(sd.w(r, c).imag()) << '\n';
}

void write_sensing_dictionary(const std::filesystem::path& path, const SensingDictionary& sd) {
    auto out = open_out(path);
    write_sensing_dictionary(out, sd);
}

SensingDictionary read_sensing_dictionary(std::istream& in) {
    const auto f = read_header(in, "hrrp-sd");
    const long long rows = to_int(field(f, "rows"));
    const long long cols = to_int(field(f, "cols"));
    if (rows < 1 || cols < 1) throw FormatError("sensing dictionary must have positive dimensions");
    SensingDictionary sd;
    sd.gamma = to_double(field(f, "gamma"));
    sd.b1 = to_double(field(f, "b1"));
    sd.b2 = to_double(field(f, "b2"));
    sd.trace.iterations = static_cast<int>(to_int(field(f, "iterations")));
    sd.trace.converged = field(f, "converged") == "1";
    sd.trace.stop_reason = field(f, "stop_reason");
    sd.design_inputs_digest = to_u64(field(f, "digest"), 16);
    const auto values = read_pairs(in, rows * cols);
    sd.w.resize(rows, cols);
    std::size_t i = 0;
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) sd.w(r, c) = values[i++];
    return sd;
}

SensingDictionary read_sensing_dictionary(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_sensing_dictionary(in);
}

void write_measurement(std::ostream& out, const Measurement& m) {
    if (static_cast<std::size_t>(m.samples.size()) != m.retained_pulses.size())
        throw std::invalid_argument("measurement: sample count differs from retained pulse count");
    out << "hrrp-measurement 1\n";
    out << "count " << m.samples.size() << "\n";
    out << "pulses";
    for (int p : m.retained_pulses) out << ' ' << p;
    out << "\n";
    out << "snr_db " << format_snr(m.snr_db) << "\n";
    out << "seed " << m.noise_seed << "\n";
    out << "data\n";
    for (Eigen::Index i = 0; i < m.samples.size(); ++i)
        out << num(m.samples(i).real()) << ' ' << num(m.samples(i).imag()) << '\n';
}

void write_measurement(const std::filesystem::path& path, const Measurement& m) {
    auto out = open_out(path);
    write_measurement(out, m);
}

Measurement read_measurement(std::istream& in) {
    const auto f = read_header(in, "hrrp-measurement");
    const long long count = to_int(field(f, "count"));
    if (count < 1) throw FormatError("measurement count must be positive");
    Measurement m;
    std::istringstream ps(field(f, "pulses"));
    std::string tok;
    while (ps >> tok) m.retained_pulses.push_back(static_cast<int>(to_int(tok)));
    if (static_cast<long long>(m.retained_pulses.size()) != count)
        throw FormatError("measurement lists " + std::to_string(m.retained_pulses.size()) + " pulses but count is " +
                          std::to_string(count));
    m.snr_db = parse_snr(field(f, "snr_db"));
    m.noise_seed = to_u64(field(f, "seed"));
    const auto values = read_pairs(in, count);
    m.samples = Eigen::Map<const ComplexVector>(values.data(), count);
    return m;
}

Measurement read_measurement(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_measurement(in);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

namespace {

constexpr const char* kTrialHeader =
    "trial,algorithm,snr_db,success,exact_support,range_cells,relative_l2_error,correlation_count,wall_time_s,"
    "iterations,stop_reason,config_digest";

StopReason stop_reason_from_string(const std::string& s) {
    if (s == "residual-threshold") return StopReason::residual_threshold;
    if (s == "max-sparsity") return StopReason::max_sparsity;
    if (s == "stagnation") return StopReason::stagnation;
    throw FormatError("unknown stop reason '" + s + "'");
}

void write_schema(std::ostream& out, const char* name) {
    out << "#schema," << name << ',' << kCsvSchemaVersion << '\n';
}

}  // namespace

void write_trials_csv(const std::filesystem::path& path, const std::vector<TrialResult>& rows) {
    auto out = open_out(path);
    write_schema(out, "hrrp-trials");
    out << kTrialHeader << '\n';
    for (const auto& r : rows) {
        out << r.trial << ',' << to_string(r.algorithm) << ',' << format_snr(r.snr_db) << ',' << (r.success ? 1 : 0)
            << ',' << (r.exact_support ? 1 : 0) << ',' << (r.range_cells ? 1 : 0) << ',' << num(r.relative_l2_error)
            << ',' << r.correlation_count << ',' << num(r.wall_time) << ',' << r.iterations << ','
            << to_string(r.stop_reason) << ',' << hex64(r.config_digest) << '\n';
    }
}

std::vector<TrialResult> read_trials_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != "#schema,hrrp-trials," + std::to_string(kCsvSchemaVersion))
        throw FormatError(path.string() + ": not a version " + std::to_string(kCsvSchemaVersion) + " trials file");
    if (!std::getline(in, line) || line != kTrialHeader) throw FormatError(path.string() + ": unexpected header row");
    std::vector<TrialResult> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 12) throw FormatError(path.string() + ": expected 12 columns in '" + line + "'");
        TrialResult r;
        r.trial = static_cast<int>(to_int(f[0]));
        r.algorithm = algorithm_from_string(f[1]);
        r.snr_db = parse_snr(f[2]);
        r.success = f[3] == "1";
        r.exact_support = f[4] == "1";
        r.range_cells = f[5] == "1";
        r.relative_l2_error = to_double(f[6]);
        r.correlation_count = to_u64(f[7]);
        r.wall_time = to_double(f[8]);
        r.iterations = static_cast<int>(to_int(f[9]));
        r.stop_reason = stop_reason_from_string(f[10]);
        r.config_digest = to_u64(f[11], 16);
        rows.push_back(r);
    }
    return rows;
}

void write_aggregate_csv(const std::filesystem::path& path, const BenchReport& report) {
    auto out = open_out(path);
    write_schema(out, "hrrp-aggregate");
    out << "algorithm,snr_db,trials,successes,success_probability,exact_support_successes,range_cell_successes,"
           "total_correlations,total_iterations,total_seconds,mean_relative_error,config_digest\n";
    for (const auto& c : report.cells) {
        out << to_string(c.algorithm) << ',' << format_snr(c.snr_db) << ',' << c.trials << ',' << c.successes << ','
            << num(c.success_probability) << ',' << c.exact_support_successes << ',' << c.range_cell_successes << ','
            << c.total_correlations << ',' << c.total_iterations << ',' << num(c.total_seconds) << ','
            << num(c.mean_relative_error) << ',' << hex64(report.config_digest) << '\n';
    }
}

void write_cde_csv(const std::filesystem::path& path, const BenchReport& report) {
    auto out = open_out(path);
    write_schema(out, "hrrp-cde");
    out << "algorithm,snr_db,threshold,fraction\n";
    for (const auto& c : report.cells)
        for (std::size_t i = 0; i < c.cde.thresholds.size(); ++i)
            out << to_string(c.algorithm) << ',' << format_snr(c.snr_db) << ',' << num(c.cde.thresholds[i]) << ','
                << num(c.cde.fraction[i]) << '\n';
}

void write_timing_csv(const std::filesystem::path& path, const std::vector<TimingRow>& rows) {
    auto out = open_out(path);
    write_schema(out, "hrrp-timing");
    out << "algorithm,total_seconds,total_correlations,total_iterations,correlations_per_iteration\n";
    for (const auto& r : rows)
        out << to_string(r.algorithm) << ',' << num(r.total_seconds) << ',' << r.total_correlations << ','
            << r.total_iterations << ',' << num(r.correlations_per_iteration) << '\n';
}

void write_srp_csv(const std::filesystem::path& path, const Srp& srp) {
    auto out = open_out(path);
    write_schema(out, "hrrp-srp");
    out << "range_m,magnitude,mechanism\n";
    for (std::size_t i = 0; i < srp.range_axis.size(); ++i) {
        out << num(srp.range_axis[i]) << ',' << num(srp.magnitude[i]) << ',';
        const auto& labels = srp.mechanisms[i];
        for (std::size_t j = 0; j < labels.size(); ++j) out << (j ? ";" : "") << labels[j];
        out << '\n';
    }
}

void write_histogram_csv(const std::filesystem::path& path, const IaiReport& report) {
    auto out = open_out(path);
    write_schema(out, "hrrp-iai-histogram");
    out << "kind,bin_low,bin_high,count\n";
    auto emit = [&](const char* kind, const Histogram& h) {
        for (std::size_t i = 0; i < h.counts.size(); ++i)
            out << kind << ',' << num(h.edges[i]) << ',' << num(h.edges[i + 1]) << ',' << h.counts[i] << '\n';
    };
    emit("diagonal", report.diag_histogram);
    emit("off-diagonal", report.offdiag_histogram);
}

}  // namespace hrrp
