#include <pdcbo/bench/figures.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace pdcbo::bench {

namespace fs = std::filesystem;

namespace {
    const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::string num(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", v);
        return buf;
    }

    std::string tick_label(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
        return buf;
    }

    std::string escape(const std::string& s)
    {
        std::string out;
        for (char c : s) {
            switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
            }
        }
        return out;
    }

    std::vector<double> ticks(double lo, double hi)
    {
        const double span = hi - lo;
        const double raw = span / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        std::vector<double> out;
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
            out.push_back(v);
        return out;
    }

    std::string points(const Frame& f, const std::vector<double>& x, const std::vector<double>& y)
    {
        std::string s;
        for (std::size_t k = 0; k < x.size(); ++k)
            s += (k ? " " : "") + num(f.px(x[k])) + "," + num(f.py(y[k]));
        return s;
    }

    void widen(double& lo, double& hi)
    {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        } else if (hi - lo < 1e-12 * std::max(1.0, std::abs(lo))) {
            const double pad = std::max(1.0, std::abs(lo)) * 0.5;
            lo -= pad;
            hi += pad;
        }
    }
} // namespace

Frame frame_for(const Figure& fig)
{
    Frame f;
    double xl = std::numeric_limits<double>::infinity(), xh = -xl, yl = xl, yh = -xl;
    auto take_y = [&](double v) {
        if (std::isfinite(v)) {
            yl = std::min(yl, v);
            yh = std::max(yh, v);
        }
    };
    for (const auto& s : fig.series) {
        for (double v : s.x)
            if (std::isfinite(v)) {
                xl = std::min(xl, v);
                xh = std::max(xh, v);
            }
        for (const auto* v : {&s.y, &s.lo, &s.hi})
            for (double y : *v)
                take_y(y);
    }
    if (fig.reference && yl <= yh)
        take_y(*fig.reference);
    widen(xl, xh);
    widen(yl, yh);
    f.x0 = xl;
    f.x1 = xh;
    f.y0 = yl;
    f.y1 = yh;
    return f;
}

std::string render_svg(const Figure& fig)
{
    const Frame f = frame_for(fig);
    const double W = f.left + f.width + 150.0, H = f.top + f.height + 60.0;
    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) + "\" viewBox=\"0 0 "
       + num(W) + " " + num(H) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(f.left + f.width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       + escape(fig.title) + "</text>\n";

    // axes and ticks
    s += "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
    s += "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" + num(f.width) + "\" height=\""
       + num(f.height) + "\"/>\n";
    s += "</g>\n<g class=\"ticks\">\n";
    for (double v : ticks(f.x0, f.x1)) {
        const double x = f.px(v), yb = f.top + f.height;
        s += "<line x1=\"" + num(x) + "\" y1=\"" + num(yb) + "\" x2=\"" + num(x) + "\" y2=\"" + num(yb + 5)
           + "\" stroke=\"black\"/>";
        s += "<text x=\"" + num(x) + "\" y=\"" + num(yb + 18) + "\" text-anchor=\"middle\">" + tick_label(v)
           + "</text>\n";
    }
    for (double v : ticks(f.y0, f.y1)) {
        const double y = f.py(v);
        s += "<line x1=\"" + num(f.left - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(f.left) + "\" y2=\"" + num(y)
           + "\" stroke=\"black\"/>";
        s += "<text x=\"" + num(f.left - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + tick_label(v)
           + "</text>\n";
    }
    s += "</g>\n";
    s += "<text x=\"" + num(f.left + f.width / 2) + "\" y=\"" + num(f.top + f.height + 40)
       + "\" text-anchor=\"middle\">" + escape(fig.x_label) + "</text>\n";
    s += "<text transform=\"translate(16," + num(f.top + f.height / 2) + ") rotate(-90)\" text-anchor=\"middle\">"
       + escape(fig.y_label) + "</text>\n";

    if (fig.reference && !fig.series.empty())
        s += "<line class=\"reference\" x1=\"" + num(f.left) + "\" y1=\"" + num(f.py(*fig.reference)) + "\" x2=\""
           + num(f.left + f.width) + "\" y2=\"" + num(f.py(*fig.reference))
           + "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";

    for (std::size_t i = 0; i < fig.series.size(); ++i) {
        const auto& ser = fig.series[i];
        const char* colour = kPalette[i % (sizeof kPalette / sizeof *kPalette)];
        if (!ser.lo.empty() && ser.lo.size() == ser.x.size() && ser.hi.size() == ser.x.size()) {
            std::vector<double> bx(ser.x), by(ser.hi);
            bx.insert(bx.end(), ser.x.rbegin(), ser.x.rend());
            by.insert(by.end(), ser.lo.rbegin(), ser.lo.rend());
            s += "<polygon class=\"band\" data-series=\"" + escape(ser.label) + "\" points=\"" + points(f, bx, by)
               + "\" fill=\"" + colour + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
        }
        s += "<polyline class=\"mean\" data-series=\"" + escape(ser.label) + "\" points=\"" + points(f, ser.x, ser.y)
           + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\"/>\n";
        const double ly = f.top + 14.0 + 18.0 * double(i);
        s += "<line x1=\"" + num(f.left + f.width + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(f.left + f.width + 32)
           + "\" y2=\"" + num(ly) + "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>";
        s += "<text x=\"" + num(f.left + f.width + 38) + "\" y=\"" + num(ly + 4) + "\">" + escape(ser.label)
           + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

std::vector<std::pair<std::string, Figure>> aggregate_figures(const Aggregate& agg)
{
    const double m = agg.band_multiplier;
    auto band = [m](const std::vector<long>& t, const std::vector<double>& mean, const std::vector<double>& sd,
                    const std::string& label) {
        PlotSeries s;
        s.label = label;
        for (std::size_t k = 0; k < t.size(); ++k) {
            s.x.push_back(double(t[k]));
            s.y.push_back(mean[k]);
            s.lo.push_back(mean[k] - m * sd[k]);
            s.hi.push_back(mean[k] + m * sd[k]);
        }
        return s;
    };
    const std::string band_note = " (mean +- " + tick_label(m) + " std)";

    std::vector<std::pair<std::string, Figure>> out;
    Figure regret{agg.name + ": cumulative regret" + band_note, "step t", "R_t", {}, std::nullopt};
    Figure cost{agg.name + ": cumulative cost" + band_note, "step t", "sum f", {}, std::nullopt};
    for (const auto& s : agg.series) {
        regret.series.push_back(band(s.t, s.regret_mean, s.regret_std, s.label));
        cost.series.push_back(band(s.t, s.cost_mean, s.cost_std, s.label));
    }
    out.emplace_back("regret", regret);
    out.emplace_back("cost", cost);

    for (Index i = 0; i < agg.n_constraints; ++i) {
        const std::string idx = std::to_string(i + 1);
        Figure sum{agg.name + ": cumulative constraint g" + idx + band_note, "step t", "sum g" + idx, {}, 0.0};
        Figure avg{agg.name + ": average constraint g" + idx + band_note, "step t", "mean g" + idx, {}, 0.0};
        for (const auto& s : agg.series) {
            std::vector<double> sm, ss, am, as;
            for (std::size_t k = 0; k < s.t.size(); ++k) {
                sm.push_back(s.gsum_mean[k](i));
                ss.push_back(s.gsum_std[k](i));
                am.push_back(s.gavg_mean[k](i));
                as.push_back(s.gavg_std[k](i));
            }
            sum.series.push_back(band(s.t, sm, ss, s.label));
            avg.series.push_back(band(s.t, am, as, s.label));
        }
        out.emplace_back("constraint_sum_" + idx, sum);
        out.emplace_back("constraint_avg_" + idx, avg);
    }
    return out;
}

std::vector<fs::path> emit_figures(const fs::path& aggregate_path, const fs::path& out_dir)
{
    const Aggregate agg = read_aggregate(aggregate_path);
    fs::create_directories(out_dir);
    std::vector<fs::path> written;
    for (const auto& [name, fig] : aggregate_figures(agg)) {
        const fs::path p = out_dir / (name + ".svg");
        std::ofstream out(p, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + p.string());
        out << render_svg(fig);
        written.push_back(p);
    }
    return written;
}

} // namespace pdcbo::bench
