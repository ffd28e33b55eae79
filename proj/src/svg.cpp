#include "hrrp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hrrp::svg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    const PlotSpec& spec;
    double x0, x1, y0, y1;

    double px(double x) const {
        double t = spec.log_x ? (std::log10(x) - x0) / (x1 - x0) : (x - x0) / (x1 - x0);
        return kLeft + t * (spec.width - kLeft - kRight);
    }
    double py(double y) const { return spec.height - kBottom - (y - y0) / (y1 - y0) * (spec.height - kTop - kBottom); }
};

void pad(double& lo, double& hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
}

void open(std::ostringstream& os, const Frame& f) {
    const auto& s = f.spec;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(s.width) << "\" height=\"" << num(s.height)
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << num(s.width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(s.title)
       << "</text>\n";
    const double l = kLeft, r = s.width - kRight, t = kTop, b = s.height - kBottom;
    os << "<rect x=\"" << num(l) << "\" y=\"" << num(t) << "\" width=\"" << num(r - l) << "\" height=\"" << num(b - t)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
        const double yp = f.py(yv);
        os << "<line x1=\"" << num(l) << "\" x2=\"" << num(r) << "\" y1=\"" << num(yp) << "\" y2=\"" << num(yp)
           << "\" stroke=\"#ddd\"/>\n<text x=\"" << num(l - 6) << "\" y=\"" << num(yp + 4)
           << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
        const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
        const double xp = kLeft + (r - l) * i / 5.0;
        os << "<text x=\"" << num(xp) << "\" y=\"" << num(b + 16) << "\" text-anchor=\"middle\">"
           << num(s.log_x ? std::pow(10.0, xv) : xv) << "</text>\n";
    }
    os << "<text x=\"" << num((l + r) / 2) << "\" y=\"" << num(s.height - 12) << "\" text-anchor=\"middle\">"
       << escape(s.x_label) << "</text>\n"
       << "<text transform=\"translate(16," << num((t + b) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape(s.y_label) << "</text>\n";
}

}  // namespace

std::string line_plot(const PlotSpec& spec, const std::vector<Series>& series) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("series '" + s.label + "' has mismatched x/y");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (spec.log_x && s.x[i] <= 0)) continue;
            const double xv = spec.log_x ? std::log10(s.x[i]) : s.x[i];
            x0 = std::min(x0, xv);
            x1 = std::max(x1, xv);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    pad(x0, x1);
    pad(y0, y1);
    Frame f{spec, x0, x1, y0, y1};
    std::ostringstream os;
    open(os, f);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* colour = kPalette[k % std::size(kPalette)];
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (spec.log_x && s.x[i] <= 0)) continue;
            os << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i])) << ' ';
        }
        os << "\"/>\n";
        const double ly = kTop + 16 + 16 * static_cast<double>(k);
        const double lx = spec.width - kRight - 130;
        os << "<line x1=\"" << num(lx) << "\" x2=\"" << num(lx + 20) << "\" y1=\"" << num(ly) << "\" y2=\""
           << num(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n<text x=\"" << num(lx + 26)
           << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string bar_plot(const PlotSpec& spec, const std::vector<double>& edges, const std::vector<double>& counts) {
    if (edges.size() != counts.size() + 1) throw std::invalid_argument("bar_plot: edges must have counts+1 entries");
    double x0 = edges.empty() ? 0 : edges.front(), x1 = edges.empty() ? 1 : edges.back();
    double y0 = 0, y1 = counts.empty() ? 1 : *std::max_element(counts.begin(), counts.end());
    pad(x0, x1);
    pad(y0, y1);
    PlotSpec linear = spec;
    linear.log_x = false;
    Frame f{linear, x0, x1, y0, y1};
    std::ostringstream os;
    open(os, f);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double l = f.px(edges[i]), r = f.px(edges[i + 1]), top = f.py(counts[i]), base = f.py(0);
        os << "<rect x=\"" << num(l) << "\" y=\"" << num(top) << "\" width=\"" << num(std::max(r - l, 0.5))
           << "\" height=\"" << num(base - top) << "\" fill=\"" << kPalette[0] << "\" stroke=\"white\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string stem_plot(const PlotSpec& spec, const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<std::string>& labels) {
    if (x.size() != y.size()) throw std::invalid_argument("stem_plot: x and y differ in length");
    double x0 = x.empty() ? 0 : *std::min_element(x.begin(), x.end());
    double x1 = x.empty() ? 1 : *std::max_element(x.begin(), x.end());
    double y0 = 0, y1 = y.empty() ? 1 : *std::max_element(y.begin(), y.end()) * 1.15;
    pad(x0, x1);
    pad(y0, y1);
    PlotSpec linear = spec;
    linear.log_x = false;
    Frame f{linear, x0, x1, y0, y1};
    std::ostringstream os;
    open(os, f);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] == 0.0) continue;
        const double xp = f.px(x[i]), yp = f.py(y[i]);
        os << "<line x1=\"" << num(xp) << "\" x2=\"" << num(xp) << "\" y1=\"" << num(f.py(0)) << "\" y2=\""
           << num(yp) << "\" stroke=\"" << kPalette[0] << "\" stroke-width=\"2\"/>\n<circle cx=\"" << num(xp)
           << "\" cy=\"" << num(yp) << "\" r=\"3\" fill=\"" << kPalette[0] << "\"/>\n";
        if (i < labels.size() && !labels[i].empty())
            os << "<text x=\"" << num(xp) << "\" y=\"" << num(yp - 6) << "\" text-anchor=\"middle\" font-size=\"10\">"
               << escape(labels[i]) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write(const std::filesystem::path& path, const std::string& svg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << svg;
}

}  // namespace hrrp::svg
