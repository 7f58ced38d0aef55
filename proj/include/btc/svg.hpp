#pragma once

#include <string>
#include <vector>

namespace btc {
namespace svg {

// Marker glyphs for stationary points: filled circle = attractor, open
// dashed circle = repeller, filled square = marginal, open dashed square =
// saddle.
enum class Marker { None, CircleSolid, CircleDashed, SquareSolid, SquareDashed };

struct Series {
    std::vector<std::pair<double, double>> pts;
    std::string color{"#1f77b4"};
    bool line{true};
    Marker marker{Marker::None};
    double marker_size{4.0};
};

struct Figure {
    std::string title;
    std::string xlabel, ylabel;
    std::vector<Series> series;
    int width{720}, height{480};
    // optional fixed ranges; NaN = autoscale
    double xmin, xmax, ymin, ymax;
    Figure();
};

// Standalone deterministic SVG 1.1 document; identical input produces
// byte-identical output. `comment` is embedded as an XML comment header
// (used for the config digest).
std::string render(const Figure& fig, const std::string& comment);

}  // namespace svg
}  // namespace btc
