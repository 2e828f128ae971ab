#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace dblend::cli {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

/// Round a span to a tidy tick step (1/2/5 times a power of ten).
double tick_step(double span) {
    if (span <= 0.0) return 1.0;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    if (norm < 1.5) return mag;
    if (norm < 3.5) return 2.0 * mag;
    if (norm < 7.5) return 5.0 * mag;
    return 10.0 * mag;
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
    const double W = 720, H = 480;
    const double ml = 70, mr = 160, mt = 40, mb = 55;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const PlotSeries& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
    if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }
    const double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
           "font-family=\"sans-serif\">" << title << "</text>\n";

    // axes + ticks
    out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
        << "\" stroke=\"black\"/>\n";
    const double xs = tick_step(xmax - xmin);
    for (double t = std::ceil(xmin / xs) * xs; t <= xmax + 1e-12; t += xs) {
        out << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << H - mb << "\" x2=\"" << fmt(px(t))
            << "\" y2=\"" << H - mb + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(px(t)) << "\" y=\"" << H - mb + 20
            << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(t)
            << "</text>\n";
    }
    const double ys = tick_step(ymax - ymin);
    for (double t = std::ceil(ymin / ys) * ys; t <= ymax + 1e-12; t += ys) {
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt(py(t)) << "\" x2=\"" << ml << "\" y2=\""
            << fmt(py(t)) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << fmt(py(t) + 4)
            << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(t)
            << "</text>\n";
    }
    out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << x_label
        << "</text>\n";
    out << "<text x=\"18\" y=\"" << (mt + H - mb) / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 18 " << (mt + H - mb) / 2 << ")\">" << y_label << "</text>\n";

    for (size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        if (series[s].connect && series[s].x.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (size_t i = 0; i < series[s].x.size(); ++i)
                out << fmt(px(series[s].x[i])) << "," << fmt(py(series[s].y[i])) << " ";
            out << "\"/>\n";
        }
        for (size_t i = 0; i < series[s].x.size(); ++i)
            out << "<circle cx=\"" << fmt(px(series[s].x[i])) << "\" cy=\"" << fmt(py(series[s].y[i]))
                << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
        const double ly = mt + 18.0 * static_cast<double>(s);
        out << "<rect x=\"" << W - mr + 12 << "\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\""
            << color << "\"/>\n";
        out << "<text x=\"" << W - mr + 30 << "\" y=\"" << ly + 10
            << "\" font-size=\"12\" font-family=\"sans-serif\">" << series[s].name << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace dblend::cli
