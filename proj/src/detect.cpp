#include "veriloc/detect.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace veriloc::detect {

Eigen::MatrixXcd ula_snapshots(const std::vector<UlaSource>& sources, const UlaConfig& ula,
                               double noise_var, std::uint64_t rng_seed) {
    if (ula.n_elements < 2) throw ParamError("ula: need at least 2 elements");
    if (ula.snapshots < 1) throw ParamError("ula: need at least 1 snapshot");
    if (ula.spacing_wavelengths > 0.5 + 1e-12)
        throw ParamError("ula: spacing above half wavelength is ambiguous");

    Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(ula.n_elements, ula.snapshots);
    Rng rng(rng_seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    for (const auto& src : sources) {
        const double u = 2.0 * kPi * ula.spacing_wavelengths * std::sin(deg_to_rad(src.azimuth_deg));
        Eigen::VectorXcd a(ula.n_elements);
        for (int m = 0; m < ula.n_elements; ++m) a(m) = std::polar(1.0, u * m);
        for (int t = 0; t < ula.snapshots; ++t) {
            const cd s = std::polar(src.amplitude, phase(rng));
            X.col(t) += a * s;
        }
    }
    if (noise_var > 0.0) {
        std::normal_distribution<double> gauss(0.0, std::sqrt(noise_var / 2.0));
        for (int t = 0; t < ula.snapshots; ++t)
            for (int m = 0; m < ula.n_elements; ++m) X(m, t) += cd{gauss(rng), gauss(rng)};
    }
    return X;
}

std::vector<double> esprit_azimuth(const Eigen::MatrixXcd& snapshots, int n_sources) {
    const int M = static_cast<int>(snapshots.rows());
    const int T = static_cast<int>(snapshots.cols());
    if (n_sources < 1 || n_sources >= M) throw ParamError("esprit: invalid source count");
    if (T < n_sources) return {};

    const Eigen::MatrixXcd R = snapshots * snapshots.adjoint() / static_cast<double>(T);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(R);
    if (eig.info() != Eigen::Success) return {};
    // eigenvalues ascending; signal subspace spans the top n_sources
    const double top = eig.eigenvalues()(M - 1);
    if (top <= 0.0 || eig.eigenvalues()(M - n_sources) < 1e-12 * top) return {};
    const Eigen::MatrixXcd Es = eig.eigenvectors().rightCols(n_sources);

    const Eigen::MatrixXcd E1 = Es.topRows(M - 1);
    const Eigen::MatrixXcd E2 = Es.bottomRows(M - 1);
    const Eigen::MatrixXcd psi = E1.completeOrthogonalDecomposition().solve(E2);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> psi_eig(psi);
    if (psi_eig.info() != Eigen::Success) return {};

    std::vector<double> angles;
    for (int i = 0; i < n_sources; ++i) {
        const double mu = std::arg(psi_eig.eigenvalues()(i));  // pi * sin(theta)
        const double s = std::clamp(mu / kPi, -1.0, 1.0);
        angles.push_back(rad_to_deg(std::asin(s)));
    }
    std::sort(angles.begin(), angles.end());
    return angles;
}

DetectionVerdict absa_check(std::optional<double> theta_deg, const AngleGate& gate) {
    DetectionVerdict v;
    v.technique = "absa";
    if (!theta_deg) {
        v.reason = "aoa estimation failure";
        return v;
    }
    // The folded arcsin domain wraps at +-90: +89 and -89 degrees map to
    // adjacent array phases, so measure the deviation on the shorter arc.
    const double direct = std::abs(*theta_deg - gate.theta_ref_deg);
    const double folded = 180.0 - std::abs(*theta_deg) - std::abs(gate.theta_ref_deg);
    v.diagnostic = std::min(direct, folded);
    v.valid = v.diagnostic <= gate.delta_th_deg;
    if (!v.valid) v.reason = "angle gate";
    return v;
}

double reference_angle(const Point2& ue_position, const Point2& bs_position) {
    const Point2 d = bs_position - ue_position;
    const double r = norm(d);
    if (r <= 0.0) throw ParamError("reference_angle: coincident positions");
    // array along +y, broadside +x: measured phase depends on sin(theta) = dy/r
    return rad_to_deg(std::asin(std::clamp(d.y / r, -1.0, 1.0)));
}

Point2 ul_position_model(const Point2& true_position, const HandshakeGate& gate,
                         std::uint64_t rng_seed) {
    if (gate.ul_sigma_m < 0.0) throw ParamError("handshake: negative UL sigma");
    if (gate.ul_sigma_m == 0.0) return true_position;
    Rng rng(rng_seed);
    std::normal_distribution<double> gauss(0.0, gate.ul_sigma_m);
    return {true_position.x + gauss(rng), true_position.y + gauss(rng)};
}

DetectionVerdict handshake_check(std::optional<Point2> p_dl, const Point2& p_ul,
                                 const HandshakeGate& gate) {
    DetectionVerdict v;
    v.technique = "handshake";
    if (!p_dl) {
        v.reason = "no downlink position";
        return v;
    }
    v.diagnostic = dist(*p_dl, p_ul);
    v.valid = v.diagnostic <= gate.epsilon_m;
    if (!v.valid) v.reason = "position discrepancy";
    return v;
}

TrackState kf_init(const Point2& position, double pos_sigma, double vel_sigma) {
    TrackState ts;
    ts.x << position.x, position.y, 0.0, 0.0;
    ts.P.setZero();
    ts.P(0, 0) = ts.P(1, 1) = pos_sigma * pos_sigma;
    ts.P(2, 2) = ts.P(3, 3) = vel_sigma * vel_sigma;
    return ts;
}

void kf_predict(TrackState& ts, double dt_s, double accel_sigma) {
    if (dt_s <= 0.0) throw ParamError("kf: dt must be positive");
    Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
    F(0, 2) = F(1, 3) = dt_s;

    const double q = accel_sigma * accel_sigma;
    const double dt2 = dt_s * dt_s, dt3 = dt2 * dt_s, dt4 = dt3 * dt_s;
    Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
    Q(0, 0) = Q(1, 1) = q * dt4 / 4.0;
    Q(2, 2) = Q(3, 3) = q * dt2;
    Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = q * dt3 / 2.0;

    ts.x = F * ts.x;
    ts.P = F * ts.P * F.transpose() + Q;
}

DetectionVerdict kf_update_gated(TrackState& ts, std::optional<Point2> z, double meas_sigma) {
    DetectionVerdict v;
    v.technique = "tracking";
    if (!z) {
        ts.coasting = true;
        ts.consecutive_valid = 0;
        v.reason = "no measurement";
        return v;
    }

    Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
    H(0, 0) = H(1, 1) = 1.0;
    const Eigen::Matrix2d R = meas_sigma * meas_sigma * Eigen::Matrix2d::Identity();
    const Eigen::Vector2d y = Eigen::Vector2d(z->x, z->y) - H * ts.x;
    const Eigen::Matrix2d S = H * ts.P * H.transpose() + R;
    const double nis = y.transpose() * S.inverse() * y;
    v.diagnostic = nis;

    if (!(nis <= ts.gate_gamma)) {
        ts.coasting = true;
        ts.consecutive_valid = 0;
        v.reason = "innovation gate";
        return v;
    }
    if (ts.coasting) {
        // M-of-N reacquisition: resume updates only after mofn_n consecutive
        // gate passes; until then propagate the prediction only.
        ++ts.consecutive_valid;
        if (ts.consecutive_valid < ts.mofn_n) {
            v.reason = "reacquisition pending";
            return v;
        }
        ts.coasting = false;
    }
    ++ts.consecutive_valid;

    const Eigen::Matrix<double, 4, 2> K = ts.P * H.transpose() * S.inverse();
    ts.x += K * y;
    const Eigen::Matrix4d IKH = Eigen::Matrix4d::Identity() - K * H;
    ts.P = IKH * ts.P * IKH.transpose() + K * R * K.transpose();  // Joseph form
    v.valid = true;
    return v;
}

}  // namespace veriloc::detect
