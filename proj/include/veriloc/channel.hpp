#pragma once

#include "veriloc/common.hpp"
#include "veriloc/prs.hpp"

namespace veriloc::channel {

struct ChannelConfig {
    double fc_hz = 3.5e9;
    double bs_height_m = 25.0;
    double ue_height_m = 1.5;
    double noise_figure_db = 7.0;
    double tx_cap_dbm = 24.0;
    double attacker_power_dbm = 48.0;
    // environment bookkeeping; the LOS close-in formula does not use these
    double building_height_m = 15.0;
    double street_width_m = 5.0;
};

struct LinkState {
    double distance_3d_m = 0.0;
    double pathloss_db = 0.0;
    double delay_s = 0.0;
    double doppler_hz = 0.0;
    double tx_power_dbm = 0.0;
};

/// LOS close-in path loss, dB: 28.0 + 22 log10(d3d) + 20 log10(fc_GHz).
/// Distances below 10 m are clamped to 10 m.
double uma_pathloss_db(double d3d_m, double fc_ghz);

/// Radial Doppler, positive when the UE moves toward the BS.
double doppler_shift_hz(const Point2& ue_velocity, const Point2& ue_pos, const Point2& bs_pos,
                        double fc_hz);

/// Geometry-derived link (distance including antenna heights, delay, Doppler);
/// tx power left at 0 dBm for power_control to fill in.
LinkState make_link(const Point2& bs_pos, const Point2& ue_pos, const Point2& ue_vel,
                    const ChannelConfig& cfg);

/// Idealized power control: equal received power across links at the target,
/// each tx power clamped to cap_dbm.
void power_control(std::vector<LinkState>& links, double target_rx_dbm, double cap_dbm);

double avg_power(const prs::IqSignal& sig);
prs::IqSignal normalized(const prs::IqSignal& sig);

/// Amplitude scale 10^((tx_power - pathloss)/20) (0 dB amplitude == 0 dBm),
/// integer-sample delay round(delay * fs), Doppler phase ramp.
prs::IqSignal apply_link(const prs::IqSignal& sig, const LinkState& link);

/// Thermal noise density plus receiver noise figure, dBm/Hz.
double noise_psd_dbm_hz(double noise_figure_db);

/// Samplewise sum padded to out_len, plus circularly-symmetric complex
/// Gaussian noise of total power psd * bandwidth. Deterministic per seed.
prs::IqSignal superpose_with_noise(const std::vector<prs::IqSignal>& signals,
                                   double noise_psd_dbm_hz, double bandwidth_hz,
                                   std::uint64_t rng_seed, std::size_t out_len,
                                   double sample_rate_hz);

}  // namespace veriloc::channel
