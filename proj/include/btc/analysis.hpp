#pragma once

#include "btc/meanfield.hpp"

namespace btc {
namespace analysis {

using meanfield::EnvelopePoint;

struct PowerFit {
    double exponent{0};
    double amplitude{0};  // A(t) = amplitude * t^exponent
    double residual{0};   // rms residual in log-log space
    int n_used{0};
};

// Least squares on (log t, log A). Transient removal: the first oscillation
// period (everything before the second peak) and amplitudes below 1e-4 are
// dropped. InsufficientRange unless >= 5 points spanning at least a decade
// in t survive.
PowerFit fit_power_amplitude(const std::vector<EnvelopePoint>& env);

struct ExpFit {
    double rate{0};       // A(t) = amplitude * exp(-rate * t)
    double beta{0};       // rate * n_s, the size-rescaled decay constant
    double amplitude{0};
    double residual{0};   // rms residual in log space
    int n_used{0};
};

// Least squares on (t, log A); same transient removal as the power fit,
// InsufficientRange unless >= 5 points survive.
ExpFit fit_exp_amplitude(const std::vector<EnvelopePoint>& env, double n_s = 1.0);

// Mean pairwise rms distance between envelopes after rescaling every time
// axis by size^-nu, interpolated on a common 200-point grid spanning the
// overlap window. DimensionMismatch if envs and sizes disagree in length,
// InsufficientData unless >= 3 envelopes of >= 2 points each,
// InsufficientRange if the rescaled envelopes do not overlap.
double collapse_score(const std::vector<std::vector<EnvelopePoint>>& envs,
                      const std::vector<double>& sizes, double nu);

struct CollapseResult {
    double nu_star{0};
    double score{0};
    std::vector<double> nu_grid;
    std::vector<double> scores;
};

CollapseResult best_collapse(const std::vector<std::vector<EnvelopePoint>>& envs,
                             const std::vector<double>& sizes,
                             const std::vector<double>& nu_grid);

// Log-log least-squares slope of gap vs size. InsufficientData for fewer
// than 3 sizes, DomainError for nonpositive entries.
double gap_scaling(const std::vector<double>& sizes, const std::vector<double>& gaps);

// Location of the largest DFT magnitude peak (mean removed), refined by
// 3-point parabolic interpolation, in cycles per time unit. InsufficientData
// for fewer than 64 samples, DomainError for a non-uniform grid, NoPeak
// unless the peak magnitude exceeds 5x the median magnitude.
double dominant_frequency(const std::vector<double>& t, const std::vector<double>& v);

struct SteadyStateMetrics {
    double purity{0};            // tr rho^2
    double diag_uniformity{0};   // max_m |rho_mm - 1/dim|
    double offdiag_mass{0};      // sum_{m != m'} |rho_mm'|^2
};

SteadyStateMetrics steadystate_metrics(const Eigen::MatrixXcd& rho);

// tr(rho_prod S^2) for the product state rho_1^{otimes n} with single-spin
// matrix [[a, b e^{-i phase}], [b e^{i phase}, 1-a]], evaluated in closed
// form: 3n/4 + n(n-1)(2P-1)/4 where P = tr rho_1^2. DomainError unless
// 0 <= a <= 1 and b^2 <= a(1-a).
double ansatz_total_spin(int n, double a, double b);

// Same quantity assembled literally in the 2^n product space. SizeLimit for
// n > 12.
double brute_force_total_spin(int n, double a, double b, double phase);

}  // namespace analysis
}  // namespace btc
