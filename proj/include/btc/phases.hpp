#pragma once

#include "btc/meanfield.hpp"

namespace btc {
namespace phases {

enum class Label { None, Ferro, Btc, FerroBtc };
const char* label_name(Label l);

// Dynamical diagnosis at one parameter point: a ferromagnetic phase needs an
// attractor with |Z| > 1e-3; a time-crystal phase needs a marginal point
// whose nearby probe trajectory keeps a closed orbit.
bool has_ferro_attractor(const std::vector<FixedPoint>& fps);
bool btc_verdict(const ModelParams& mp, const std::vector<FixedPoint>& fps);
Label classify_point(const ModelParams& mp);

struct Cell {
    double omega_x{0};
    double delta_gamma{0};
    Label label{Label::None};
    bool ferro_root{false};  // any root with |Z| > 1e-3
    bool para_root{false};   // any root with |Z| <= 1e-3
};

struct Diagram {
    int p{2}, q{1};
    std::vector<double> omega_x_grid;
    std::vector<double> delta_gamma_grid;
    std::vector<Cell> cells;  // row-major, delta_gamma outer, omega_x inner

    const Cell& at(int ix, int ig) const;
};

// Sweeps the (omega_x, delta_gamma) grid (in units of omega_z = 1) with a
// parallel work queue; results are deterministic and independent of the
// thread count.
Diagram sweep(int p, int q, const std::vector<double>& omega_x_grid,
              const std::vector<double>& delta_gamma_grid, int threads = 1);

// column index of the first flip of `pred` along a row scan; -1 when absent
int boundary_column(const Diagram& d, int ig, bool Cell::* member);

}  // namespace phases
}  // namespace btc
