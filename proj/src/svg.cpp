#include "qbem/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "qbem/errors.hpp"

namespace qbem {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#17becf", "#8c564b", "#e377c2"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title, const std::string& xlabel,
                      const std::vector<double>& x, const std::vector<Series>& series) {
    const double W = 720, H = 440, L = 70, R = 170, T = 40, B = 50;
    double x0 = x.empty() ? 0.0 : x.front(), x1 = x.empty() ? 1.0 : x.back();
    double y0 = 0.0, y1 = 0.0;
    bool first = true;
    for (const auto& s : series)
        for (double v : s.y) {
            if (!std::isfinite(v)) continue;
            if (first) {
                y0 = y1 = v;
                first = false;
            }
            y0 = std::min(y0, v);
            y1 = std::max(y1, v);
        }
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };

    std::ofstream out(path);
    if (!out) throw ConfigError("svg: cannot write '" + path + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << fmt(W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
        << escape(title) << "</text>\n";
    out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
        out << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(H - B + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << label(xv) << "</text>\n";
        out << "<text x=\"" << fmt(L - 6) << "\" y=\"" << fmt(py(yv) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label(yv) << "</text>\n";
    }
    out << "<text x=\"" << fmt(L + (W - L - R) / 2) << "\" y=\"" << fmt(H - 12)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(xlabel) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* col = kColors[s % 8];
        out << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < x.size() && i < series[s].y.size(); ++i) {
            if (!std::isfinite(series[s].y[i])) continue;
            out << fmt(px(x[i])) << ',' << fmt(py(series[s].y[i])) << ' ';
        }
        out << "\"/>\n";
        double ly = T + 16 + 18 * static_cast<double>(s);
        out << "<line x1=\"" << fmt(W - R + 12) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(W - R + 32) << "\" y2=\""
            << fmt(ly - 4) << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fmt(W - R + 38) << "\" y=\"" << fmt(ly)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(series[s].name) << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace qbem
