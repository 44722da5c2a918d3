#pragma once

#include "veriloc/common.hpp"
#include "veriloc/receiver.hpp"

namespace veriloc::locate {

struct PositionEstimate {
    Point2 xy_m{};
    double residual_norm = 0.0;
    bool converged = false;
    int n_bs_used = 0;
};

enum class Outcome { Success, LargeError, DoS };

struct OutcomeClass {
    Outcome kind = Outcome::DoS;
    double error_m = 0.0;  // meaningless for DoS
};

/// Damped Gauss-Newton on the range-difference residuals
/// r_i(p) = c * rstd_i - (||p - p_i|| - ||p - p_ref||).
/// Converged when the step norm drops below 1e-3 m within 50 iterations;
/// fewer than 3 base stations or divergence yields converged = false.
PositionEstimate multilaterate(const receiver::RstdSet& rstds,
                               const std::vector<Point2>& bs_positions,
                               const std::vector<int>& bs_ids, const Point2& initial_guess);

OutcomeClass classify_outcome(const PositionEstimate& est, const Point2& truth,
                              double threshold_m = 15.0);

}  // namespace veriloc::locate
