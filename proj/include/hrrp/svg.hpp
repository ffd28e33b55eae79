#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hrrp::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    double width = 640;
    double height = 420;
};

/// Polyline chart with markers and a legend.
std::string line_plot(const PlotSpec& spec, const std::vector<Series>& series);

/// Bars over consecutive bin edges (edges.size() == counts.size() + 1).
std::string bar_plot(const PlotSpec& spec, const std::vector<double>& edges, const std::vector<double>& counts);

/// Vertical stems at x with heights y; labels are drawn above each stem.
std::string stem_plot(const PlotSpec& spec, const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<std::string>& labels = {});

void write(const std::filesystem::path& path, const std::string& svg);

}  // namespace hrrp::svg
