#pragma once

#include <pdcbo/bench/suite.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pdcbo::bench {

/// One curve with an optional shaded band (lo/hi empty for none).
struct PlotSeries {
    std::string label;
    std::vector<double> x, y, lo, hi;
};

struct Figure {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
    std::optional<double> reference; ///< horizontal dashed line (constraint threshold)
};

/// Data range to pixel mapping of the plot area; y grows upwards in data space.
struct Frame {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    double left = 70.0, top = 40.0, width = 520.0, height = 300.0;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
    double py(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

/// Frame covering every point, band and reference line; degenerate ranges are widened.
Frame frame_for(const Figure& fig);

/// Self-contained SVG document. Curves are <polyline class="mean">, bands <polygon class="band">.
std::string render_svg(const Figure& fig);

/**
 * Figures of an aggregate: cumulative regret, cumulative cost and, per constraint,
 * cumulative and running-average constraint value, with bands at mean +- m std.
 */
std::vector<std::pair<std::string, Figure>> aggregate_figures(const Aggregate& agg);

/// Writes aggregate_figures(read_aggregate(path)) as <out_dir>/<name>.svg.
std::vector<std::filesystem::path> emit_figures(const std::filesystem::path& aggregate_path,
                                                const std::filesystem::path& out_dir);

} // namespace pdcbo::bench
