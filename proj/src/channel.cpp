#include "veriloc/channel.hpp"

#include "veriloc/kernels.hpp"

#include <cmath>
#include <iostream>
#include <random>

namespace veriloc::channel {

double uma_pathloss_db(double d3d_m, double fc_ghz) {
    if (fc_ghz <= 0.0) throw ParamError("pathloss: carrier frequency must be positive");
    if (d3d_m < 10.0) {
        std::cerr << "channel: clamping 3-D distance " << d3d_m << " m to the 10 m model floor\n";
        d3d_m = 10.0;
    }
    return 28.0 + 22.0 * std::log10(d3d_m) + 20.0 * std::log10(fc_ghz);
}

double doppler_shift_hz(const Point2& ue_velocity, const Point2& ue_pos, const Point2& bs_pos,
                        double fc_hz) {
    const Point2 d = bs_pos - ue_pos;
    const double r = norm(d);
    if (r == 0.0) return 0.0;
    const double radial = (ue_velocity.x * d.x + ue_velocity.y * d.y) / r;
    return radial * fc_hz / kSpeedOfLight;
}

LinkState make_link(const Point2& bs_pos, const Point2& ue_pos, const Point2& ue_vel,
                    const ChannelConfig& cfg) {
    const double d2d = dist(bs_pos, ue_pos);
    const double dh = cfg.bs_height_m - cfg.ue_height_m;
    LinkState link;
    link.distance_3d_m = std::hypot(d2d, dh);
    link.pathloss_db = uma_pathloss_db(link.distance_3d_m, cfg.fc_hz / 1e9);
    link.delay_s = link.distance_3d_m / kSpeedOfLight;
    link.doppler_hz = doppler_shift_hz(ue_vel, ue_pos, bs_pos, cfg.fc_hz);
    return link;
}

void power_control(std::vector<LinkState>& links, double target_rx_dbm, double cap_dbm) {
    if (links.empty()) throw ParamError("power_control: no links");
    for (auto& link : links) link.tx_power_dbm = std::min(target_rx_dbm + link.pathloss_db, cap_dbm);
}

double avg_power(const prs::IqSignal& sig) {
    if (sig.samples.empty()) return 0.0;
    return kern::energy(sig.samples.data(), sig.samples.size()) /
           static_cast<double>(sig.samples.size());
}

prs::IqSignal normalized(const prs::IqSignal& sig) {
    const double p = avg_power(sig);
    if (p <= 0.0) throw ParamError("normalize: zero-power signal");
    prs::IqSignal out = sig;
    const double s = 1.0 / std::sqrt(p);
    for (auto& v : out.samples) v *= s;
    return out;
}

prs::IqSignal apply_link(const prs::IqSignal& sig, const LinkState& link) {
    const double fs = sig.sample_rate_hz;
    const auto delay_samples = static_cast<std::size_t>(std::llround(link.delay_s * fs));
    const double amp = std::pow(10.0, (link.tx_power_dbm - link.pathloss_db) / 20.0);

    prs::IqSignal out;
    out.sample_rate_hz = fs;
    out.t0_s = sig.t0_s;
    out.samples.assign(delay_samples + sig.samples.size(), cd{0.0, 0.0});
    for (std::size_t i = 0; i < sig.samples.size(); ++i)
        out.samples[delay_samples + i] = amp * sig.samples[i];
    if (link.doppler_hz != 0.0) {
        const double dphase = 2.0 * M_PI * link.doppler_hz / fs;
        kern::mix(out.samples.data(), out.samples.data(), out.samples.size(), 0.0, dphase);
    }
    return out;
}

double noise_psd_dbm_hz(double noise_figure_db) { return -174.0 + noise_figure_db; }

prs::IqSignal superpose_with_noise(const std::vector<prs::IqSignal>& signals,
                                   double noise_psd_dbm_hz, double bandwidth_hz,
                                   std::uint64_t rng_seed, std::size_t out_len,
                                   double sample_rate_hz) {
    for (const auto& s : signals)
        if (s.sample_rate_hz != sample_rate_hz)
            throw ParamError("superpose: sample-rate mismatch");
    if (out_len == 0) throw ParamError("superpose: zero output length");

    prs::IqSignal out;
    out.sample_rate_hz = sample_rate_hz;
    out.samples.assign(out_len, cd{0.0, 0.0});
    for (const auto& s : signals) {
        const std::size_t n = std::min(out_len, s.samples.size());
        for (std::size_t i = 0; i < n; ++i) out.samples[i] += s.samples[i];
    }

    const double noise_power = db_to_lin(noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
    if (noise_power > 0.0) {
        Rng rng(rng_seed);
        std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power / 2.0));
        for (auto& v : out.samples) v += cd{gauss(rng), gauss(rng)};
    }
    return out;
}

}  // namespace veriloc::channel
