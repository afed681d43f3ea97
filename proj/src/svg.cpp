#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "rewardlab/harness.hpp"

namespace rewardlab {

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct AxisRange {
    double lo, hi;
    double map(double v, double pixel_lo, double pixel_hi) const {
        return pixel_lo + (v - lo) / (hi - lo) * (pixel_hi - pixel_lo);
    }
};

AxisRange padded_range(double lo, double hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

} // namespace

void emit_scatter_svg(const std::vector<ComparisonRecord>& records,
                      const std::vector<std::string>& specs, const std::string& spec,
                      const std::string& path) {
    std::size_t idx = 0;
    for (; idx < specs.size(); ++idx)
        if (specs[idx] == spec) break;
    if (idx == specs.size())
        throw Error(ErrorCode::UnknownSpec, "'" + spec + "' not in the record columns");

    std::vector<double> xs, ys;
    for (const ComparisonRecord& rec : records) {
        double v = rec.metric_values[idx];
        if (std::isfinite(v) && std::isfinite(rec.regret)) {
            xs.push_back(v);
            ys.push_back(rec.regret);
        }
    }

    const double width = 800, height = 600;
    const double ml = 80, mr = 30, mt = 45, mb = 60;
    AxisRange xr = xs.empty() ? AxisRange{0.0, 1.0}
                              : padded_range(*std::min_element(xs.begin(), xs.end()),
                                             *std::max_element(xs.begin(), xs.end()));
    AxisRange yr = ys.empty() ? AxisRange{0.0, 1.0}
                              : padded_range(*std::min_element(ys.begin(), ys.end()),
                                             *std::max_element(ys.begin(), ys.end()));

    std::string rho_text = "Pearson r = n/a";
    if (xs.size() >= 2) {
        try {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "Pearson r = %.3f",
                          pearson_correlation(xs, ys));
            rho_text = buf;
        } catch (const Error&) {
        }
    }

    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
        << "\">\n"
        << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";

    // frame
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr
        << "\" height=\"" << height - mt - mb
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    // ticks and grid
    const int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        double fx = xr.lo + (xr.hi - xr.lo) * i / n_ticks;
        double px = xr.map(fx, ml, width - mr);
        out << "<line x1=\"" << fmt(px) << "\" y1=\"" << height - mb << "\" x2=\""
            << fmt(px) << "\" y2=\"" << height - mb + 6
            << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
            << "<text x=\"" << fmt(px) << "\" y=\"" << height - mb + 20
            << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">"
            << fmt(fx) << "</text>\n";
        double fy = yr.lo + (yr.hi - yr.lo) * i / n_ticks;
        double py = yr.map(fy, height - mb, mt);
        out << "<line x1=\"" << ml - 6 << "\" y1=\"" << fmt(py) << "\" x2=\"" << ml
            << "\" y2=\"" << fmt(py) << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
            << "<text x=\"" << ml - 10 << "\" y=\"" << fmt(py + 4)
            << "\" font-size=\"12\" text-anchor=\"end\" font-family=\"sans-serif\">"
            << fmt(fy) << "</text>\n";
    }

    // axis labels and annotations
    out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 15
        << "\" font-size=\"14\" text-anchor=\"middle\" font-family=\"sans-serif\">"
        << spec << "</text>\n"
        << "<text x=\"20\" y=\"" << (mt + height - mb) / 2
        << "\" font-size=\"14\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 20 "
        << (mt + height - mb) / 2 << ")\">regret</text>\n"
        << "<text x=\"" << ml << "\" y=\"25\" font-size=\"15\" "
           "font-family=\"sans-serif\">"
        << spec << " vs regret</text>\n"
        << "<text x=\"" << width - mr << "\" y=\"25\" font-size=\"14\" "
           "text-anchor=\"end\" font-family=\"sans-serif\">"
        << rho_text << "</text>\n";

    for (std::size_t i = 0; i < xs.size(); ++i) {
        double px = xr.map(xs[i], ml, width - mr);
        double py = yr.map(ys[i], height - mb, mt);
        out << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py)
            << "\" r=\"2.5\" fill=\"#33679b\" fill-opacity=\"0.55\"/>\n";
    }
    out << "</svg>\n";
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

} // namespace rewardlab
