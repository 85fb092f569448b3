#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "habitfbp/csv.hpp"   // fmt_double

namespace habitfbp {

// Hand-rolled static line chart: axes, tick labels, legend, optional log-x.
// Deliberately minimal; figure fidelity is "same quantities, same ranges".
class SvgChart {
public:
    SvgChart(std::string title, std::string x_label, std::string y_label, bool log_x = false)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)),
          log_x_(log_x) {}

    void add_series(std::string name, std::vector<double> x, std::vector<double> y) {
        if (x.size() != y.size()) throw std::invalid_argument("svg: series size mismatch");
        series_.push_back({std::move(name), std::move(x), std::move(y)});
    }

    // dashed vertical marker, e.g. for a threshold location
    void add_vline(double x, std::string name) { vlines_.push_back({x, std::move(name)}); }

    void write(const std::string& path) const {
        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
        double ymin = xmin, ymax = -xmin;
        for (const auto& s : series_) {
            for (size_t i = 0; i < s.x.size(); ++i) {
                const double xv = tx(s.x[i]);
                if (!std::isfinite(xv) || !std::isfinite(s.y[i])) continue;
                xmin = std::min(xmin, xv);
                xmax = std::max(xmax, xv);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
        if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
        if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
        const double ypad = 0.05 * (ymax - ymin);
        ymin -= ypad;
        ymax += ypad;

        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("svg: cannot open " + path);
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
           << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
        os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
        os << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
           << xml(title_) << "</text>\n";

        // frame
        os << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << plot_w() << "\" height=\""
           << plot_h() << "\" fill=\"none\" stroke=\"black\"/>\n";

        // ticks
        for (int i = 0; i <= 5; ++i) {
            const double fx = xmin + (xmax - xmin) * i / 5.0;
            const double px = ML + plot_w() * i / 5.0;
            os << "<line x1=\"" << px << "\" y1=\"" << MT + plot_h() << "\" x2=\"" << px
               << "\" y2=\"" << MT + plot_h() + 4 << "\" stroke=\"black\"/>\n";
            os << "<text x=\"" << px << "\" y=\"" << MT + plot_h() + 16
               << "\" text-anchor=\"middle\" font-size=\"10\">" << tick_label(fx) << "</text>\n";
            const double fy = ymin + (ymax - ymin) * i / 5.0;
            const double py = MT + plot_h() * (1.0 - i / 5.0);
            os << "<line x1=\"" << ML - 4 << "\" y1=\"" << py << "\" x2=\"" << ML << "\" y2=\""
               << py << "\" stroke=\"black\"/>\n";
            os << "<text x=\"" << ML - 6 << "\" y=\"" << py + 3
               << "\" text-anchor=\"end\" font-size=\"10\">" << short_label(fy) << "</text>\n";
        }
        os << "<text x=\"" << ML + plot_w() / 2 << "\" y=\"" << H - 6
           << "\" text-anchor=\"middle\" font-size=\"12\">" << xml(x_label_)
           << (log_x_ ? " (log)" : "") << "</text>\n";
        os << "<text x=\"12\" y=\"" << MT + plot_h() / 2
           << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 12 "
           << MT + plot_h() / 2 << ")\">" << xml(y_label_) << "</text>\n";

        const auto px = [&](double xv) {
            return ML + (tx(xv) - xmin) / (xmax - xmin) * plot_w();
        };
        const auto py = [&](double yv) {
            return MT + (1.0 - (yv - ymin) / (ymax - ymin)) * plot_h();
        };

        for (const auto& [vx, vname] : vlines_) {
            const double p = px(vx);
            if (!(p >= ML && p <= ML + plot_w())) continue;
            os << "<line x1=\"" << p << "\" y1=\"" << MT << "\" x2=\"" << p << "\" y2=\""
               << MT + plot_h() << "\" stroke=\"gray\" stroke-dasharray=\"4,3\"/>\n";
            os << "<text x=\"" << p + 2 << "\" y=\"" << MT + 12 << "\" font-size=\"9\">"
               << xml(vname) << "</text>\n";
        }

        for (size_t k = 0; k < series_.size(); ++k) {
            const auto& s = series_[k];
            std::string pts;
            for (size_t i = 0; i < s.x.size(); ++i) {
                const double xv = tx(s.x[i]);
                if (!std::isfinite(xv) || !std::isfinite(s.y[i])) continue;
                pts += fmt_double(px(s.x[i]));
                pts += ',';
                pts += fmt_double(py(s.y[i]));
                pts += ' ';
            }
            os << "<polyline fill=\"none\" stroke=\"" << color(k)
               << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
            const double ly = MT + 14.0 * (k + 1);
            os << "<line x1=\"" << ML + plot_w() - 90 << "\" y1=\"" << ly << "\" x2=\""
               << ML + plot_w() - 74 << "\" y2=\"" << ly << "\" stroke=\"" << color(k)
               << "\" stroke-width=\"1.5\"/>\n";
            os << "<text x=\"" << ML + plot_w() - 70 << "\" y=\"" << ly + 3
               << "\" font-size=\"10\">" << xml(s.name) << "</text>\n";
        }
        os << "</svg>\n";
    }

private:
    struct Series {
        std::string name;
        std::vector<double> x, y;
    };

    static constexpr int W = 640, H = 420, ML = 60, MT = 30, MR = 15, MB = 45;
    static double plot_w() { return W - ML - MR; }
    static double plot_h() { return H - MT - MB; }

    double tx(double x) const { return log_x_ ? std::log10(x) : x; }

    std::string tick_label(double fx) const {
        char buf[32];
        if (log_x_) std::snprintf(buf, sizeof(buf), "%.3g", std::pow(10.0, fx));
        else std::snprintf(buf, sizeof(buf), "%.3g", fx);
        return buf;
    }
    static std::string short_label(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", v);
        return buf;
    }
    static std::string xml(const std::string& s) {
        std::string out;
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
    static const char* color(size_t k) {
        static const char* palette[] = {"black",   "#1f77b4", "#2ca02c", "#d62728",
                                        "#9467bd", "#ff7f0e", "#8c564b", "#7f7f7f"};
        return palette[k % 8];
    }

    std::string title_, x_label_, y_label_;
    bool log_x_;
    std::vector<Series> series_;
    std::vector<std::pair<double, std::string>> vlines_;
};

}  // namespace habitfbp
