#include "lito/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "lito/errors.hpp"

namespace lito {
namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;

const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    return colors[i % 8];
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

std::pair<double, double> y_range(const std::vector<Series>& series) {
    double lo = 0.0, hi = 0.0;
    for (const auto& s : series)
        for (double y : s.ys) {
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
    if (hi == lo) hi = lo + 1.0;
    return {lo, hi};
}

void check_inputs(const std::vector<std::string>& x_labels, const std::vector<Series>& series) {
    if (x_labels.empty() || series.empty()) throw contract_error("svg: empty chart");
    for (const auto& s : series)
        if (s.ys.size() != x_labels.size())
            throw contract_error("svg: series length does not match x labels");
}

void chart_frame(std::ostringstream& out, const std::string& title, const std::string& y_label,
                 double y_lo, double y_hi) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << escape(title) << "</text>\n";
    out << "<text x=\"16\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << kHeight / 2
        << ")\">" << escape(y_label) << "</text>\n";
    // Axes plus four horizontal gridlines with tick labels.
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kHeight - kBottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
        << kWidth - kRight << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
    for (int g = 0; g <= 4; ++g) {
        double frac = g / 4.0;
        double y = kHeight - kBottom - frac * (kHeight - kTop - kBottom);
        out << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(y) << "\" x2=\"" << kWidth - kRight
            << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(y + 4)
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(y_lo + frac * (y_hi - y_lo))
            << "</text>\n";
    }
}

void legend(std::ostringstream& out, const std::vector<Series>& series) {
    double y = kTop;
    for (std::size_t i = 0; i < series.size(); ++i) {
        double x = kWidth - kRight - 150;
        out << "<rect x=\"" << x << "\" y=\"" << fmt(y) << "\" width=\"12\" height=\"12\" fill=\""
            << palette(i) << "\"/>\n";
        out << "<text x=\"" << x + 16 << "\" y=\"" << fmt(y + 10) << "\" font-size=\"11\">"
            << escape(series[i].label) << "</text>\n";
        y += 16;
    }
    out << "</svg>\n";
}

double to_y(double v, double lo, double hi) {
    return kHeight - kBottom - (v - lo) / (hi - lo) * (kHeight - kTop - kBottom);
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                           const std::vector<Series>& series, const std::string& y_label) {
    check_inputs(x_labels, series);
    auto [lo, hi] = y_range(series);
    std::ostringstream out;
    chart_frame(out, title, y_label, lo, hi);
    const double span = kWidth - kLeft - kRight;
    const double step = x_labels.size() > 1 ? span / (x_labels.size() - 1) : 0.0;
    for (std::size_t i = 0; i < x_labels.size(); ++i) {
        double x = kLeft + i * step;
        out << "<text x=\"" << fmt(x) << "\" y=\"" << kHeight - kBottom + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(x_labels[i]) << "</text>\n";
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        out << "<polyline fill=\"none\" stroke=\"" << palette(s) << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < series[s].ys.size(); ++i) {
            if (i) out << ' ';
            out << fmt(kLeft + i * step) << ',' << fmt(to_y(series[s].ys[i], lo, hi));
        }
        out << "\"/>\n";
        for (std::size_t i = 0; i < series[s].ys.size(); ++i)
            out << "<circle cx=\"" << fmt(kLeft + i * step) << "\" cy=\""
                << fmt(to_y(series[s].ys[i], lo, hi)) << "\" r=\"3\" fill=\"" << palette(s)
                << "\"/>\n";
    }
    legend(out, series);
    return out.str();
}

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& x_labels,
                          const std::vector<Series>& series, const std::string& y_label) {
    check_inputs(x_labels, series);
    auto [lo, hi] = y_range(series);
    lo = std::min(lo, 0.0);
    std::ostringstream out;
    chart_frame(out, title, y_label, lo, hi);
    const double span = kWidth - kLeft - kRight;
    const double group_w = span / x_labels.size();
    const double bar_w = group_w * 0.8 / series.size();
    for (std::size_t i = 0; i < x_labels.size(); ++i) {
        double gx = kLeft + i * group_w;
        out << "<text x=\"" << fmt(gx + group_w / 2) << "\" y=\"" << kHeight - kBottom + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(x_labels[i]) << "</text>\n";
        for (std::size_t s = 0; s < series.size(); ++s) {
            double x = gx + group_w * 0.1 + s * bar_w;
            double y0 = to_y(std::max(series[s].ys[i], 0.0), lo, hi);
            double y1 = to_y(std::min(series[s].ys[i], 0.0), lo, hi);
            out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(bar_w)
                << "\" height=\"" << fmt(y1 - y0) << "\" fill=\"" << palette(s) << "\"/>\n";
        }
    }
    legend(out, series);
    return out.str();
}

}  // namespace lito
