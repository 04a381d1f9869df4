#include "mcrkit/svg.hpp"

#include "mcrkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mcr {

namespace {

constexpr double W = 640, H = 400, L = 60, R = 20, T = 40, B = 40;

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string header(const std::string& title) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) + "\">\n" +
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + "<text x=\"" + num(W / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" + escape(title) +
           "</text>\n";
}

}  // namespace

std::string svg_line_plot(const Vector& x, const Matrix& y, const std::vector<std::string>& labels,
                          const std::string& title) {
    if (x.size() != y.rows() || x.size() < 2) throw InputError("svg_line_plot: need matching x and y with >= 2 points");
    const double x0 = x.minCoeff(), x1 = x.maxCoeff();
    double y0 = y.minCoeff(), y1 = y.maxCoeff();
    if (y1 == y0) { y0 -= 1; y1 += 1; }
    const double sx = (W - L - R) / (x1 > x0 ? x1 - x0 : 1.0), sy = (H - T - B) / (y1 - y0);
    std::string out = header(title);
    out += "<rect x=\"" + num(L) + "\" y=\"" + num(T) + "\" width=\"" + num(W - L - R) + "\" height=\"" +
           num(H - T - B) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        out += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" + std::string(kPalette[j % 8]) + "\" points=\"";
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            out += num(L + (x(i) - x0) * sx) + "," + num(H - B - (y(i, j) - y0) * sy);
            out += i + 1 < x.size() ? " " : "";
        }
        out += "\"/>\n";
        if (static_cast<size_t>(j) < labels.size())
            out += "<text x=\"" + num(W - R - 80) + "\" y=\"" + num(T + 16 + 16 * static_cast<double>(j)) +
                   "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + kPalette[j % 8] + "\">" +
                   escape(labels[static_cast<size_t>(j)]) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string svg_heatmap(const Matrix& v, const std::string& title) {
    if (v.size() == 0) throw InputError("svg_heatmap: empty matrix");
    double lo = kInf, hi = -kInf;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::isfinite(v.data()[i])) { lo = std::min(lo, v.data()[i]); hi = std::max(hi, v.data()[i]); }
    if (!(hi > lo)) hi = lo + 1;
    const double cw = (W - L - R) / static_cast<double>(v.rows()), ch = (H - T - B) / static_cast<double>(v.cols());
    std::string out = header(title);
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = 0; j < v.cols(); ++j) {
            if (!std::isfinite(v(i, j))) continue;
            const double f = (v(i, j) - lo) / (hi - lo);
            const int r = static_cast<int>(255 * f), b = static_cast<int>(255 * (1 - f));
            char col[16];
            std::snprintf(col, sizeof col, "#%02x40%02x", r, b);
            out += "<rect x=\"" + num(L + cw * static_cast<double>(i)) + "\" y=\"" +
                   num(H - B - ch * static_cast<double>(j + 1)) + "\" width=\"" + num(cw + 0.01) + "\" height=\"" +
                   num(ch + 0.01) + "\" fill=\"" + col + "\"/>\n";
        }
    out += "</svg>\n";
    return out;
}

}  // namespace mcr
