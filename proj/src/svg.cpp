#include "rsma/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace rsma {

namespace {
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fnum(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}
}  // namespace

void write_svg_chart(const std::string& path, const std::vector<SvgSeries>& series,
                     const std::string& x_label, const std::string& y_label,
                     const std::string& title) {
    const double W = 640, H = 440;
    const double L = 70, R = 20, T = 36, B = 52;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!(xmin < xmax)) {
        xmin -= 1;
        xmax += 1;
    }
    if (!(ymin < ymax)) {
        ymin -= 1;
        ymax += 1;
    }
    ymin = std::min(ymin, 0.0);
    auto sx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto sy = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write svg: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" "
           "font-size=\"14\">" << title << "</text>\n";
    // axes
    out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R
        << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\""
        << H - B << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 5.0;
        const double fy = ymin + (ymax - ymin) * i / 5.0;
        out << "<line x1=\"" << sx(fx) << "\" y1=\"" << H - B << "\" x2=\"" << sx(fx)
            << "\" y2=\"" << H - B + 4 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << sx(fx) << "\" y=\"" << H - B + 18
            << "\" text-anchor=\"middle\" font-size=\"10\">" << fnum(fx) << "</text>\n";
        out << "<line x1=\"" << L - 4 << "\" y1=\"" << sy(fy) << "\" x2=\"" << L
            << "\" y2=\"" << sy(fy) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << L - 8 << "\" y=\"" << sy(fy) + 3
            << "\" text-anchor=\"end\" font-size=\"10\">" << fnum(fy) << "</text>\n";
    }
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 14
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << (T + H - B) / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
        << (T + H - B) / 2 << ")\">" << y_label << "</text>\n";

    for (size_t i = 0; i < series.size(); ++i) {
        const char* color = kPalette[i % std::size(kPalette)];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : series[i].points) out << sx(x) << "," << sy(y) << " ";
        out << "\"/>\n";
        const double ly = T + 16 + 16 * static_cast<double>(i);
        out << "<line x1=\"" << W - R - 130 << "\" y1=\"" << ly << "\" x2=\""
            << W - R - 110 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << W - R - 104 << "\" y=\"" << ly + 4
            << "\" font-size=\"11\">" << series[i].label << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace rsma
