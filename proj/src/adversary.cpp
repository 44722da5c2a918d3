#include "veriloc/adversary.hpp"

#include "veriloc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace veriloc::adversary {

Point2 attacker_position(const scenario::Trajectory& traj, int epoch, int lag_points) {
    if (epoch < 0 || traj.empty()) throw ParamError("attacker: invalid epoch");
    if (lag_points < 0) throw ParamError("attacker: negative lag");
    const int idx = std::min<int>(std::max(0, epoch - lag_points),
                                  static_cast<int>(traj.size()) - 1);
    return traj[idx].xy_m;
}

std::vector<double> fbs_spoof_delays(const Point2& fake_position,
                                     const std::vector<Point2>& bs_positions) {
    if (bs_positions.empty()) throw ParamError("fbs: no target base stations");
    std::vector<double> delays(bs_positions.size());
    for (std::size_t i = 0; i < bs_positions.size(); ++i)
        delays[i] = dist(fake_position, bs_positions[i]) / kSpeedOfLight;
    const double shift = *std::min_element(delays.begin(), delays.end());
    for (auto& d : delays) d -= shift;
    return delays;
}

prs::IqSignal gen_fbs_waveform(const std::vector<prs::PrsConfig>& targets,
                               const std::vector<double>& delays_s, const prs::Numerology& num,
                               int first_slot, int n_slots, int frame) {
    if (targets.size() != delays_s.size()) throw ParamError("fbs: targets/delays size mismatch");
    prs::IqSignal out;
    out.sample_rate_hz = num.sample_rate_hz;
    if (targets.empty()) return out;
    if (n_slots < 1) throw ParamError("fbs: need at least one slot");

    for (std::size_t t = 0; t < targets.size(); ++t) {
        prs::IqSignal train;
        train.sample_rate_hz = num.sample_rate_hz;
        for (int s = 0; s < n_slots; ++s) {
            const auto grid = prs::generate_prs_grid(targets[t], num, first_slot + s, frame);
            const auto slot_sig = prs::ofdm_modulate(grid, num);
            train.samples.insert(train.samples.end(), slot_sig.samples.begin(),
                                 slot_sig.samples.end());
        }
        train = channel::normalized(train);
        const auto shift =
            static_cast<std::size_t>(std::llround(delays_s[t] * num.sample_rate_hz));
        if (out.samples.size() < shift + train.samples.size())
            out.samples.resize(shift + train.samples.size(), cd{0.0, 0.0});
        for (std::size_t i = 0; i < train.samples.size(); ++i)
            out.samples[shift + i] += train.samples[i];
    }
    return out;
}

prs::IqSignal gen_meacon_waveform(const prs::IqSignal& composite_at_attacker, double gain_db,
                                  double delay_s) {
    if (delay_s < 0.0) throw ParamError("meacon: negative processing delay");
    const auto shift =
        static_cast<std::size_t>(std::llround(delay_s * composite_at_attacker.sample_rate_hz));
    const double amp = std::pow(10.0, gain_db / 20.0);
    prs::IqSignal out;
    out.sample_rate_hz = composite_at_attacker.sample_rate_hz;
    out.t0_s = composite_at_attacker.t0_s;
    out.samples.assign(shift + composite_at_attacker.samples.size(), cd{0.0, 0.0});
    for (std::size_t i = 0; i < composite_at_attacker.samples.size(); ++i)
        out.samples[shift + i] = amp * composite_at_attacker.samples[i];
    return out;
}

prs::IqSignal gen_jam_waveform(std::size_t duration_samples, double power_dbm,
                               double sample_rate_hz, std::uint64_t rng_seed) {
    if (duration_samples < 1) throw ParamError("jam: duration must be >= 1");
    const double power = db_to_lin(power_dbm);
    Rng rng(rng_seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(power / 2.0));
    prs::IqSignal out;
    out.sample_rate_hz = sample_rate_hz;
    out.samples.resize(duration_samples);
    for (auto& v : out.samples) v = cd{gauss(rng), gauss(rng)};
    return out;
}

}  // namespace veriloc::adversary
