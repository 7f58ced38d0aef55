#include "btc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "btc/io.hpp"
#include "btc/model.hpp"

namespace btc {
namespace svg {

namespace {

using io::fmt;

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
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

// XML comments may not contain "--"
std::string comment_safe(const std::string& s) {
    std::string out = s;
    size_t pos = 0;
    while ((pos = out.find("--", pos)) != std::string::npos) out.replace(pos, 2, "- ");
    return out;
}

struct Range {
    double lo, hi;
};

Range autoscale(double lo, double hi) {
    if (!(lo <= hi)) {
        lo = 0;
        hi = 1;
    }
    if (lo == hi) {
        double pad = std::max(1.0, std::abs(lo)) * 0.1;
        return {lo - pad, hi + pad};
    }
    double pad = (hi - lo) * 0.05;
    return {lo - pad, hi + pad};
}

// round tick step to 1/2/5 * 10^k covering ~n intervals
double nice_step(double span, int n) {
    double raw = span / n;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double frac = raw / mag;
    double step = frac <= 1 ? 1 : frac <= 2 ? 2 : frac <= 5 ? 5 : 10;
    return step * mag;
}

// drop the roundoff that floor/step arithmetic leaves on tick values
double snap(double v, double step) {
    double r = std::round(v / step) * step;
    return std::abs(r) < 1e-9 * step ? 0.0 : r;
}

}  // namespace

Figure::Figure()
    : xmin(std::numeric_limits<double>::quiet_NaN()),
      xmax(std::numeric_limits<double>::quiet_NaN()),
      ymin(std::numeric_limits<double>::quiet_NaN()),
      ymax(std::numeric_limits<double>::quiet_NaN()) {}

std::string render(const Figure& fig, const std::string& comment) {
    size_t total = 0;
    for (const Series& s : fig.series) total += s.pts.size();
    if (total == 0) throw Error(ErrorCode::EmptyDataset, "nothing to plot");

    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const Series& s : fig.series)
        for (const auto& [x, y] : s.pts) {
            if (std::isfinite(x)) {
                xlo = std::min(xlo, x);
                xhi = std::max(xhi, x);
            }
            if (std::isfinite(y)) {
                ylo = std::min(ylo, y);
                yhi = std::max(yhi, y);
            }
        }
    Range xr = autoscale(xlo, xhi);
    Range yr = autoscale(ylo, yhi);
    if (std::isfinite(fig.xmin)) xr.lo = fig.xmin;
    if (std::isfinite(fig.xmax)) xr.hi = fig.xmax;
    if (std::isfinite(fig.ymin)) yr.lo = fig.ymin;
    if (std::isfinite(fig.ymax)) yr.hi = fig.ymax;
    if (!(xr.hi > xr.lo) || !(yr.hi > yr.lo))
        throw Error(ErrorCode::DomainError, "plot range is empty");

    const double ml = 62, mr = 14, mt = fig.title.empty() ? 14 : 32, mb = 44;
    const double pw = fig.width - ml - mr;
    const double ph = fig.height - mt - mb;
    auto px = [&](double x) { return ml + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return mt + (yr.hi - y) / (yr.hi - yr.lo) * ph; };
    auto r2 = [](double v) {  // svg coordinates at fixed 0.01 px resolution
        double r = std::round(v * 100.0) / 100.0;
        return io::fmt(r == 0.0 ? 0.0 : r);
    };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fig.width
        << "\" height=\"" << fig.height << "\" viewBox=\"0 0 " << fig.width << ' '
        << fig.height << "\">\n";
    if (!comment.empty()) out << "<!-- " << comment_safe(comment) << " -->\n";
    out << "<rect width=\"" << fig.width << "\" height=\"" << fig.height
        << "\" fill=\"#ffffff\"/>\n";

    // axes frame and ticks
    out << "<g stroke=\"#333333\" stroke-width=\"1\" fill=\"none\">\n";
    out << "<rect x=\"" << r2(ml) << "\" y=\"" << r2(mt) << "\" width=\"" << r2(pw)
        << "\" height=\"" << r2(ph) << "\"/>\n";
    out << "</g>\n";
    out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
    double xstep = nice_step(xr.hi - xr.lo, 6);
    for (double x = std::ceil(xr.lo / xstep) * xstep; x <= xr.hi + 1e-9 * xstep; x += xstep) {
        double xs = snap(x, xstep);
        out << "<line x1=\"" << r2(px(xs)) << "\" y1=\"" << r2(mt + ph) << "\" x2=\""
            << r2(px(xs)) << "\" y2=\"" << r2(mt + ph + 4)
            << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << r2(px(xs)) << "\" y=\"" << r2(mt + ph + 16)
            << "\" text-anchor=\"middle\">" << fmt(xs) << "</text>\n";
    }
    double ystep = nice_step(yr.hi - yr.lo, 5);
    for (double y = std::ceil(yr.lo / ystep) * ystep; y <= yr.hi + 1e-9 * ystep; y += ystep) {
        double ys = snap(y, ystep);
        out << "<line x1=\"" << r2(ml - 4) << "\" y1=\"" << r2(py(ys)) << "\" x2=\"" << r2(ml)
            << "\" y2=\"" << r2(py(ys)) << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << r2(ml - 7) << "\" y=\"" << r2(py(ys) + 3.5)
            << "\" text-anchor=\"end\">" << fmt(ys) << "</text>\n";
    }
    if (!fig.xlabel.empty())
        out << "<text x=\"" << r2(ml + pw / 2) << "\" y=\"" << r2(fig.height - 8)
            << "\" text-anchor=\"middle\">" << xml_escape(fig.xlabel) << "</text>\n";
    if (!fig.ylabel.empty())
        out << "<text x=\"14\" y=\"" << r2(mt + ph / 2)
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << r2(mt + ph / 2)
            << ")\">" << xml_escape(fig.ylabel) << "</text>\n";
    if (!fig.title.empty())
        out << "<text x=\"" << r2(ml + pw / 2)
            << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(fig.title)
            << "</text>\n";
    out << "</g>\n";

    // data, clipped to the frame
    out << "<clipPath id=\"frame\"><rect x=\"" << r2(ml) << "\" y=\"" << r2(mt)
        << "\" width=\"" << r2(pw) << "\" height=\"" << r2(ph) << "\"/></clipPath>\n";
    out << "<g clip-path=\"url(#frame)\">\n";
    for (const Series& s : fig.series) {
        if (s.line && s.pts.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << s.color
                << "\" stroke-width=\"1.2\" points=\"";
            bool first = true;
            for (const auto& [x, y] : s.pts) {
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                if (!first) out << ' ';
                out << r2(px(x)) << ',' << r2(py(y));
                first = false;
            }
            out << "\"/>\n";
        }
        if (s.marker != Marker::None) {
            bool circle = s.marker == Marker::CircleSolid || s.marker == Marker::CircleDashed;
            bool solid = s.marker == Marker::CircleSolid || s.marker == Marker::SquareSolid;
            for (const auto& [x, y] : s.pts) {
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                std::string style = solid
                    ? "fill=\"" + s.color + "\" stroke=\"none\""
                    : "fill=\"none\" stroke=\"" + s.color +
                          "\" stroke-width=\"1.4\" stroke-dasharray=\"3 2\"";
                if (circle) {
                    out << "<circle cx=\"" << r2(px(x)) << "\" cy=\"" << r2(py(y)) << "\" r=\""
                        << fmt(s.marker_size) << "\" " << style << "/>\n";
                } else {
                    out << "<rect x=\"" << r2(px(x) - s.marker_size) << "\" y=\""
                        << r2(py(y) - s.marker_size) << "\" width=\"" << fmt(2 * s.marker_size)
                        << "\" height=\"" << fmt(2 * s.marker_size) << "\" " << style
                        << "/>\n";
                }
            }
        }
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

}  // namespace svg
}  // namespace btc
