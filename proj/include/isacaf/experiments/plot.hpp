// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Minimal SVG line plots drawn from CSV tables (no plotting backend needed).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "isacaf/experiments/csv.hpp"

namespace isacaf::experiments {

struct PlotSpec {
    std::string file;   // output name, e.g. "zero_doppler.svg"
    std::string table;  // CSV file the plot is drawn from
    std::string x;
    std::vector<std::string> y;  // empty: every column except x
    std::string title;
    std::string ylabel;
};

namespace detail {

inline std::string fmt(double v, const char* f = "%.4g")
{
    char b[32];
    std::snprintf(b, sizeof b, f, v);
    return b;
}

inline std::string xml_escape(const std::string& s)
{
    std::string o;
    for (char c : s) {
        if (c == '&') o += "&amp;";
        else if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else o += c;
    }
    return o;
}

/// About five round tick values covering [lo, hi].
inline RVec ticks(double lo, double hi)
{
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    RVec t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

} // namespace detail

inline std::string render_svg(const CsvTable& table, const PlotSpec& spec)
{
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    const double W = 720, H = 440, ml = 70, mr = 190, mt = 40, mb = 55;
    const std::size_t xc = table.column(spec.x);
    std::vector<std::size_t> ycs;
    if (spec.y.empty()) {
        for (std::size_t i = 0; i < table.columns(); ++i)
            if (i != xc) ycs.push_back(i);
    } else {
        for (const auto& n : spec.y) ycs.push_back(table.column(n));
    }
    const RVec xs = table.numbers(xc);
    double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
    for (double v : xs)
        if (std::isfinite(v)) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (std::size_t c : ycs)
        for (double v : table.numbers(c))
            if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
    if (!(x1 > x0)) x0 -= 1, x1 += 1;
    if (!(y1 > y0)) y0 -= 1, y1 += 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double v) { return ml + (v - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double v) { return H - mb - (v - y0) / (y1 - y0) * (H - mt - mb); };

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt(W) + "\" height=\"" +
                    detail::fmt(H) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + detail::fmt(W / 2 - mr / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         detail::xml_escape(spec.title) + "</text>\n";
    for (double t : detail::ticks(x0, x1)) {
        s += "<line x1=\"" + detail::fmt(px(t)) + "\" y1=\"" + detail::fmt(mt) + "\" x2=\"" + detail::fmt(px(t)) +
             "\" y2=\"" + detail::fmt(H - mb) + "\" stroke=\"#e0e0e0\"/>\n";
        s += "<text x=\"" + detail::fmt(px(t)) + "\" y=\"" + detail::fmt(H - mb + 16) + "\" text-anchor=\"middle\">" +
             detail::fmt(t) + "</text>\n";
    }
    for (double t : detail::ticks(y0, y1)) {
        s += "<line x1=\"" + detail::fmt(ml) + "\" y1=\"" + detail::fmt(py(t)) + "\" x2=\"" + detail::fmt(W - mr) +
             "\" y2=\"" + detail::fmt(py(t)) + "\" stroke=\"#e0e0e0\"/>\n";
        s += "<text x=\"" + detail::fmt(ml - 6) + "\" y=\"" + detail::fmt(py(t) + 4) + "\" text-anchor=\"end\">" +
             detail::fmt(t) + "</text>\n";
    }
    s += "<rect x=\"" + detail::fmt(ml) + "\" y=\"" + detail::fmt(mt) + "\" width=\"" + detail::fmt(W - ml - mr) +
         "\" height=\"" + detail::fmt(H - mt - mb) + "\" fill=\"none\" stroke=\"black\"/>\n";
    s += "<text x=\"" + detail::fmt((ml + W - mr) / 2) + "\" y=\"" + detail::fmt(H - 12) + "\" text-anchor=\"middle\">" +
         detail::xml_escape(spec.x) + "</text>\n";
    s += "<text transform=\"translate(18," + detail::fmt((mt + H - mb) / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         detail::xml_escape(spec.ylabel) + "</text>\n";
    for (std::size_t k = 0; k < ycs.size(); ++k) {
        const RVec ys = table.numbers(ycs[k]);
        const char* col = palette[k % 10];
        std::string pts;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
            pts += detail::fmt(px(xs[i]), "%.2f") + "," + detail::fmt(py(ys[i]), "%.2f") + " ";
        }
        s += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        const double ly = mt + 10 + 18.0 * static_cast<double>(k);
        s += "<line x1=\"" + detail::fmt(W - mr + 12) + "\" y1=\"" + detail::fmt(ly) + "\" x2=\"" + detail::fmt(W - mr + 36) +
             "\" y2=\"" + detail::fmt(ly) + "\" stroke=\"" + col + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + detail::fmt(W - mr + 42) + "\" y=\"" + detail::fmt(ly + 4) + "\">" +
             detail::xml_escape(table.header()[ycs[k]]) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

} // namespace isacaf::experiments
