#pragma once

#include "veriloc/common.hpp"
#include "veriloc/verdict.hpp"

#include <Eigen/Dense>

#include <optional>

namespace veriloc::detect {

struct UlaConfig {
    int n_elements = 5;
    double spacing_wavelengths = 0.5;
    int snapshots = 48;
};

struct AngleGate {
    double theta_ref_deg = 0.0;
    double delta_th_deg = 20.0;
};

struct HandshakeGate {
    double epsilon_m = 20.0;
    double ul_sigma_m = 3.0;
};

struct UlaSource {
    double azimuth_deg = 0.0;  // signed broadside angle, (-90, 90)
    double amplitude = 1.0;
};

/// Element-by-snapshot matrix: each source contributes a(theta) * s_t with
/// a_m(theta) = exp(j*pi*m*sin(theta)) at half-wavelength spacing, plus
/// element-wise complex Gaussian noise. Source symbols are unit-power QPSK-like
/// random phases scaled by the source amplitude.
Eigen::MatrixXcd ula_snapshots(const std::vector<UlaSource>& sources, const UlaConfig& ula,
                               double noise_var, std::uint64_t rng_seed);

/// Standard ESPRIT over the two maximally-overlapping subarrays. Empty result
/// on rank-deficient covariance.
std::vector<double> esprit_azimuth(const Eigen::MatrixXcd& snapshots, int n_sources = 1);

DetectionVerdict absa_check(std::optional<double> theta_deg, const AngleGate& gate);

/// Bearing from the UE to the BS in the array's signed broadside frame
/// (array along +y, broadside +x; angles fold front/back via arcsin).
double reference_angle(const Point2& ue_position, const Point2& bs_position);

Point2 ul_position_model(const Point2& true_position, const HandshakeGate& gate,
                         std::uint64_t rng_seed);

DetectionVerdict handshake_check(std::optional<Point2> p_dl, const Point2& p_ul,
                                 const HandshakeGate& gate);

/// 85% chi-square(2) gate.
inline constexpr double kNisGate = 3.79423996977176;

struct TrackState {
    Eigen::Vector4d x = Eigen::Vector4d::Zero();  // [px, py, vx, vy]
    Eigen::Matrix4d P = Eigen::Matrix4d::Identity();
    double gate_gamma = kNisGate;
    int consecutive_valid = 0;
    bool coasting = false;
    int mofn_n = 2;
};

TrackState kf_init(const Point2& position, double pos_sigma, double vel_sigma);

/// Constant-velocity predict with discrete white-noise-acceleration Q.
void kf_predict(TrackState& ts, double dt_s, double accel_sigma);

/// Innovation-gated position update. Gate failures, absent measurements, and
/// the M-of-N reacquisition counter all leave the state at the prediction.
DetectionVerdict kf_update_gated(TrackState& ts, std::optional<Point2> z, double meas_sigma);

}  // namespace veriloc::detect
