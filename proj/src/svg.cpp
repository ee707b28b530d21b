#include "vibroid/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace vibroid {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 700.0;
constexpr double kTop = 46.0;
constexpr double kBottom = 370.0;

// Fixed palette; cycles when a chart has more series.
const char* const kPalette[] = {"#1f6fb2", "#d0592c", "#3a8c5c", "#8a4fb0",
                                "#b0293a", "#6b6b6b", "#b08c2c", "#2ca6a4"};

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

}  // namespace

void write_line_chart(const std::filesystem::path& path, const PlotSpec& spec,
                      const std::vector<PlotSeries>& series) {
    if (series.empty()) {
        throw std::runtime_error("svg: no series to plot");
    }
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) {
            throw std::runtime_error("svg: series '" + s.name + "' has mismatched x/y lengths");
        }
    }

    const auto transform = [](double v, bool log_axis) {
        if (!log_axis) return v;
        return v > 0.0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN();
    };

    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -x_min;
    double y_min = x_min;
    double y_max = -x_min;
    for (const auto& s : series) {
        for (size_t i = 0; i < s.x.size(); ++i) {
            const double xv = transform(s.x[i], spec.log_x);
            const double yv = transform(s.y[i], spec.log_y);
            if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
            x_min = std::min(x_min, xv);
            x_max = std::max(x_max, xv);
            y_min = std::min(y_min, yv);
            y_max = std::max(y_max, yv);
        }
    }
    if (!std::isfinite(x_min) || !std::isfinite(y_min)) {
        throw std::runtime_error("svg: no finite points to plot");
    }
    if (x_max == x_min) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_max == y_min) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    const auto px = [&](double v) {
        return kLeft + (v - x_min) / (x_max - x_min) * (kRight - kLeft);
    };
    const auto py = [&](double v) {
        return kBottom - (v - y_min) / (y_max - y_min) * (kBottom - kTop);
    };

    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("svg: cannot write " + path.string());
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << ' '
        << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << (kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << xml_escape(spec.title) << "</text>\n";

    // Grid and ticks: 6 divisions per axis.
    for (int i = 0; i <= 6; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 6.0;
        const double fy = y_min + (y_max - y_min) * i / 6.0;
        const double gx = px(fx);
        const double gy = py(fy);
        out << "<line x1=\"" << num(gx) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(gx)
            << "\" y2=\"" << num(kBottom) << "\" stroke=\"#dddddd\"/>\n";
        out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(gy) << "\" x2=\""
            << num(kRight) << "\" y2=\"" << num(gy) << "\" stroke=\"#dddddd\"/>\n";
        const double x_val = spec.log_x ? std::pow(10.0, fx) : fx;
        const double y_val = spec.log_y ? std::pow(10.0, fy) : fy;
        out << "<text x=\"" << num(gx) << "\" y=\"" << num(kBottom + 16)
            << "\" text-anchor=\"middle\">" << tick_label(x_val) << "</text>\n";
        out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(gy + 4)
            << "\" text-anchor=\"end\">" << tick_label(y_val) << "</text>\n";
    }
    out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\""
        << num(kRight - kLeft) << "\" height=\"" << num(kBottom - kTop)
        << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << num((kLeft + kRight) / 2) << "\" y=\"" << num(kHeight - 10)
        << "\" text-anchor=\"middle\">" << xml_escape(spec.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << num((kTop + kBottom) / 2)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << num((kTop + kBottom) / 2)
        << ")\">" << xml_escape(spec.y_label) << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
        // Deterministic stride keeps big traces readable and files small.
        const size_t stride = std::max<size_t>(1, s.x.size() / 2000);
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (size_t i = 0; i < s.x.size(); i += stride) {
            const double xv = transform(s.x[i], spec.log_x);
            const double yv = transform(s.y[i], spec.log_y);
            if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
            out << num(px(xv)) << ',' << num(py(yv)) << ' ';
        }
        out << "\"/>\n";
        const double ly = kTop + 16.0 * static_cast<double>(si) + 8.0;
        out << "<line x1=\"" << num(kLeft + 10) << "\" y1=\"" << num(ly) << "\" x2=\""
            << num(kLeft + 34) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << num(kLeft + 40) << "\" y=\"" << num(ly + 4) << "\">"
            << xml_escape(s.name) << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) {
        throw std::runtime_error("svg: write failed for " + path.string());
    }
}

}  // namespace vibroid
