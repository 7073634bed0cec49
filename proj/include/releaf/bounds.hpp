#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "releaf/policy.hpp"

namespace releaf {

/// Regret-order exponent as a function of the relevance dimension:
/// g(d) = (2 + 2d + sqrt(4d^2 + 16d + 12)) / (4 + 2d + sqrt(4d^2 + 16d + 12)).
/// g(1) equals 2/(1 + sqrt(2)).
inline double relevance_exponent(int d_rel) {
    if (d_rel < 1) throw std::invalid_argument("relevance_exponent: d_rel must be positive");
    const double d = static_cast<double>(d_rel);
    const double root = std::sqrt(4.0 * d * d + 16.0 * d + 12.0);
    return (2.0 + 2.0 * d + root) / (4.0 + 2.0 * d + root);
}

/// Initial partition level guaranteeing instantaneous exploitation regret at
/// most epsilon (with the policy's confidence): ceil(log2(3L / (2 epsilon))).
inline unsigned epsilon_initial_level(double lipschitz, double epsilon) {
    if (!(lipschitz > 0.0)) throw std::invalid_argument("epsilon_initial_level: lipschitz must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon_initial_level: epsilon must be positive");
    const double raw = std::log2(3.0 * lipschitz / (2.0 * epsilon));
    if (raw <= 0.0) return 0;
    return static_cast<unsigned>(std::ceil(raw));
}

struct TheoreticalBounds {
    bool applicable = false;   // closed forms hold only for unscaled control numbers
    double exploit_regret = 0.0;
    double explore_regret = 0.0;
    double exploration_count = 0.0;
};

/// Closed-form worst-case bounds for the single-relevant-type analysis:
///   exploitation regret <= 16 L D 2^(2 rho) T^(rho/(1+rho))
///   exploration count   <= (960 D^2 / (7 L^2)) ln(T A D / delta) T^(4/rho)
///                          + (64 D^2 / 3) T^(2/rho)
/// with exploration regret at most (c_O + 1) times the count.
inline TheoreticalBounds theoretical_bounds(const PolicyParams& params, double horizon) {
    params.validate();
    if (!(horizon >= 1.0)) throw std::invalid_argument("theoretical_bounds: horizon must be >= 1");
    TheoreticalBounds out;
    out.applicable = params.control_scale == 1.0;
    const double d = static_cast<double>(params.num_types);
    const double a = static_cast<double>(params.num_actions);
    const double L = params.lipschitz;
    const double rho = params.rho;
    out.exploit_regret = 16.0 * L * d * std::exp2(2.0 * rho) * std::pow(horizon, rho / (1.0 + rho));
    const double log_term = std::log(horizon * a * d / params.confidence);
    out.exploration_count = (960.0 * d * d / (7.0 * L * L)) * log_term * std::pow(horizon, 4.0 / rho) +
                            (64.0 * d * d / 3.0) * std::pow(horizon, 2.0 / rho);
    out.explore_regret = (params.observe_cost + 1.0) * out.exploration_count;
    return out;
}

/// Least-squares slope of log(value) against log(time) over checkpoints.
/// Requires at least three points with positive values.
inline double slope_fit(const std::vector<std::pair<double, double>>& checkpoints) {
    if (checkpoints.size() < 3) throw std::domain_error("slope_fit: need at least 3 checkpoints");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [t, value] : checkpoints) {
        if (!(t > 0.0 && value > 0.0)) throw std::domain_error("slope_fit: nonpositive checkpoint");
        const double x = std::log(t);
        const double y = std::log(value);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(checkpoints.size());
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) throw std::domain_error("slope_fit: degenerate checkpoint times");
    return (n * sxy - sx * sy) / denom;
}

}  // namespace releaf
