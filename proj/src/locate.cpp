#include "veriloc/locate.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace veriloc::locate {

namespace {

Eigen::VectorXd residuals(const Eigen::Vector2d& p, const std::vector<Point2>& bs,
                          const Point2& ref, const std::vector<double>& range_diff) {
    Eigen::VectorXd r(bs.size());
    const double dref = std::hypot(p.x() - ref.x, p.y() - ref.y);
    for (std::size_t i = 0; i < bs.size(); ++i) {
        const double di = std::hypot(p.x() - bs[i].x, p.y() - bs[i].y);
        r(i) = range_diff[i] - (di - dref);
    }
    return r;
}

}  // namespace

PositionEstimate multilaterate(const receiver::RstdSet& rstds,
                               const std::vector<Point2>& bs_positions,
                               const std::vector<int>& bs_ids, const Point2& initial_guess) {
    if (bs_positions.size() != bs_ids.size())
        throw ParamError("locate: bs position/id list size mismatch");
    std::map<int, Point2> pos_of;
    for (std::size_t i = 0; i < bs_ids.size(); ++i) pos_of[bs_ids[i]] = bs_positions[i];

    PositionEstimate est;
    est.xy_m = initial_guess;
    const auto ref_it = pos_of.find(rstds.reference_bs);
    if (ref_it == pos_of.end()) return est;  // unknown reference -> DoS
    const Point2 ref = ref_it->second;

    std::vector<Point2> others;
    std::vector<double> range_diff;  // c * rstd
    for (const auto& [id, rstd_s] : rstds.values_s) {
        if (id == rstds.reference_bs) continue;
        const auto it = pos_of.find(id);
        if (it == pos_of.end()) continue;
        others.push_back(it->second);
        range_diff.push_back(kSpeedOfLight * rstd_s);
    }
    est.n_bs_used = static_cast<int>(others.size()) + 1;
    if (others.size() < 2) return est;  // fewer than 3 BSs -> DoS

    const auto solve_from = [&](Eigen::Vector2d p) {
        Eigen::VectorXd r = residuals(p, others, ref, range_diff);
        bool converged = false;
        for (int iter = 0; iter < 50; ++iter) {
            Eigen::MatrixXd J(others.size(), 2);
            const double dref = std::hypot(p.x() - ref.x, p.y() - ref.y);
            if (dref < 1e-9) break;  // on top of a BS: Jacobian undefined
            for (std::size_t i = 0; i < others.size(); ++i) {
                const double di = std::hypot(p.x() - others[i].x, p.y() - others[i].y);
                if (di < 1e-9) {
                    J(i, 0) = J(i, 1) = 0.0;
                    continue;
                }
                J(i, 0) = -((p.x() - others[i].x) / di - (p.x() - ref.x) / dref);
                J(i, 1) = -((p.y() - others[i].y) / di - (p.y() - ref.y) / dref);
            }
            if (!J.allFinite() || !r.allFinite()) break;
            Eigen::Vector2d step = -J.colPivHouseholderQr().solve(r);
            if (!step.allFinite()) break;

            double alpha = 1.0;
            bool improved = false;
            for (int h = 0; h < 8; ++h) {
                const Eigen::Vector2d cand = p + alpha * step;
                const Eigen::VectorXd rc = residuals(cand, others, ref, range_diff);
                if (rc.norm() <= r.norm()) {
                    p = cand;
                    r = rc;
                    improved = true;
                    break;
                }
                alpha /= 2.0;
            }
            if (!improved) break;  // divergence
            if ((alpha * step).norm() < 1e-3) {
                converged = true;
                break;
            }
        }
        return std::tuple<Eigen::Vector2d, double, bool>{p, r.norm(), converged};
    };

    // The hyperbola system generically has two intersections; a single descent
    // can land on the ghost one far from the serving cell. Run several starts
    // around the initial guess and keep the smallest-residual solution,
    // breaking near-ties in favour of the solution nearest the guess.
    const Eigen::Vector2d g(initial_guess.x, initial_guess.y);
    double scale = 0.0;
    for (const auto& b : bs_positions) scale += std::hypot(g.x() - b.x, g.y() - b.y);
    scale /= static_cast<double>(bs_positions.size());

    std::vector<Eigen::Vector2d> starts{g};
    for (int k = 0; k < 8; ++k) {
        const double th = 2.0 * kPi * k / 8.0;
        starts.emplace_back(g + 0.4 * scale * Eigen::Vector2d(std::cos(th), std::sin(th)));
    }

    Eigen::Vector2d best_p = g;
    double best_r = std::numeric_limits<double>::infinity();
    bool best_conv = false;
    for (const auto& s : starts) {
        const auto [p, rn, conv] = solve_from(s);
        if (!conv || !std::isfinite(rn)) continue;
        const bool tie = best_conv && std::abs(rn - best_r) <= 0.1;
        const bool better =
            !best_conv || (tie ? (p - g).norm() < (best_p - g).norm() : rn < best_r - 0.1);
        if (better) {
            best_p = p;
            best_r = rn;
            best_conv = true;
        }
    }
    if (!best_conv) {
        // no start converged: report the plain descent result for diagnostics
        const auto [p, rn, conv] = solve_from(g);
        best_p = p;
        best_r = rn;
    }
    est.converged = best_conv;
    est.xy_m = {best_p.x(), best_p.y()};
    est.residual_norm = best_r;
    if (!std::isfinite(est.residual_norm)) est.converged = false;
    return est;
}

OutcomeClass classify_outcome(const PositionEstimate& est, const Point2& truth,
                              double threshold_m) {
    OutcomeClass out;
    if (!est.converged) return out;
    out.error_m = dist(est.xy_m, truth);
    out.kind = (out.error_m <= threshold_m) ? Outcome::Success : Outcome::LargeError;
    return out;
}

}  // namespace veriloc::locate
