#pragma once

#include "veriloc/common.hpp"
#include "veriloc/prs.hpp"
#include "veriloc/scenario.hpp"

namespace veriloc::adversary {

enum class AttackKind { None, FbsSpoof, Meaconing, Jamming };

struct AttackConfig {
    AttackKind kind = AttackKind::None;
    double power_dbm = 48.0;
    int lag_points = 10;
    Point2 spoof_offset_m{200.0, 0.0};  // fake position = attacker position + offset
    double meacon_processing_delay_s = 1e-6;
    double jam_bandwidth_hz = 0.0;  // 0 = full sampled band
    int phase_start = 0;            // attack active on epochs [phase_start, phase_end)
    int phase_end = 0;
};

/// Attacker trails the UE along its own trajectory by lag_points samples.
Point2 attacker_position(const scenario::Trajectory& traj, int epoch, int lag_points);

/// Per-BS transmit delays (s, all >= 0) such that replica arrivals at the
/// victim carry the RSTD set of a UE located at fake_position. All replicas
/// share the attacker->victim path, so only the pairwise differences matter;
/// the common shift keeps every delay non-negative.
std::vector<double> fbs_spoof_delays(const Point2& fake_position,
                                     const std::vector<Point2>& bs_positions);

/// Sum of standard-PRS replica slot trains, one per spoofed BS, each shifted
/// by its spoof delay. Unit average power per replica before summation.
prs::IqSignal gen_fbs_waveform(const std::vector<prs::PrsConfig>& targets,
                               const std::vector<double>& delays_s, const prs::Numerology& num,
                               int first_slot, int n_slots, int frame);

/// Amplified, uniformly delayed copy of the composite captured at the
/// attacker; no per-BS reshaping.
prs::IqSignal gen_meacon_waveform(const prs::IqSignal& composite_at_attacker, double gain_db,
                                  double delay_s);

/// Complex Gaussian noise at the configured power (0 dB amplitude == 0 dBm).
prs::IqSignal gen_jam_waveform(std::size_t duration_samples, double power_dbm,
                               double sample_rate_hz, std::uint64_t rng_seed);

}  // namespace veriloc::adversary
