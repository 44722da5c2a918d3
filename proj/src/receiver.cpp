#include "veriloc/receiver.hpp"

#include "veriloc/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace veriloc::receiver {

namespace {

ToaMeasurement measure_from_corr(const cvec& corr, double kappa, int bs_id) {
    ToaMeasurement m;
    m.bs_id = bs_id;
    if (corr.empty()) return m;
    std::size_t peak = 0;
    double peak_pow = 0.0;
    for (std::size_t i = 0; i < corr.size(); ++i) {
        const double p = std::norm(corr[i]);
        if (p > peak_pow) {
            peak_pow = p;
            peak = i;
        }
    }
    double floor_sum = 0.0;
    std::size_t floor_n = 0;
    for (std::size_t i = 0; i < corr.size(); ++i) {
        if (i + kPeakGuardLags >= peak && i <= peak + kPeakGuardLags) continue;
        floor_sum += std::norm(corr[i]);
        ++floor_n;
    }
    const double floor = (floor_n > 0) ? floor_sum / floor_n : 0.0;
    m.sample_index = static_cast<std::int64_t>(peak);
    m.peak_value = corr[peak];
    if (floor > 0.0) {
        m.peak_to_floor_db = lin_to_db(peak_pow / floor);
        m.detected = peak_pow >= kappa * floor;
    } else {
        m.peak_to_floor_db = peak_pow > 0.0 ? 300.0 : 0.0;
        m.detected = peak_pow > 0.0;
    }
    return m;
}

double corr_metric(const cvec& corr) {
    double best = 0.0;
    for (const cd& v : corr) best = std::max(best, std::norm(v));
    return std::sqrt(best);
}

}  // namespace

std::vector<double> doppler_grid(double span_hz, double step_hz) {
    if (span_hz < 0.0 || step_hz <= 0.0) throw ParamError("doppler: bad grid parameters");
    std::vector<double> grid;
    for (double f = -span_hz; f <= span_hz + step_hz / 2.0; f += step_hz) grid.push_back(f);
    return grid;
}

prs::IqSignal derotate(const prs::IqSignal& sig, double freq_hz) {
    prs::IqSignal out = sig;
    if (freq_hz != 0.0) {
        const double dphase = -2.0 * kPi * freq_hz / sig.sample_rate_hz;
        kern::mix(out.samples.data(), out.samples.data(), out.samples.size(), 0.0, dphase);
    }
    return out;
}

DopplerEstimate coarse_doppler_estimate(const prs::IqSignal& sig, const prs::IqSignal& replica,
                                        const std::vector<double>& grid_hz) {
    if (grid_hz.size() < 3) throw ParamError("doppler: grid needs at least 3 points");
    if (replica.samples.size() > sig.samples.size())
        throw ParamError("doppler: replica longer than signal");
    const std::size_t max_lag = sig.samples.size() - replica.samples.size();

    // Mixing the replica up by f is equivalent (in correlation magnitude) to
    // derotating the signal by f, and lets the signal spectrum be shared.
    std::vector<double> metric(grid_hz.size());
    cvec mixed(replica.samples.size());
    cvec sig_spec;
    for (std::size_t i = 0; i < grid_hz.size(); ++i) {
        const double dphase = 2.0 * kPi * grid_hz[i] / sig.sample_rate_hz;
        kern::mix(replica.samples.data(), mixed.data(), replica.samples.size(), 0.0, dphase);
        const auto plan = fft::make_xcorr_plan(mixed, max_lag);
        if (sig_spec.empty()) sig_spec = fft::signal_spectrum(sig.samples, plan.fft_len);
        metric[i] = corr_metric(fft::xcorr(plan, sig_spec));
    }

    const std::size_t best =
        std::max_element(metric.begin(), metric.end()) - metric.begin();
    DopplerEstimate est;
    if (best == 0 || best + 1 == metric.size()) {
        est.freq_hz = grid_hz[best];
        est.at_grid_edge = true;
        return est;
    }
    const double ym = metric[best - 1], y0 = metric[best], yp = metric[best + 1];
    const double denom = ym - 2.0 * y0 + yp;
    const double step = grid_hz[best] - grid_hz[best - 1];
    double offset = 0.0;
    if (denom < 0.0) offset = 0.5 * (ym - yp) / denom;
    est.freq_hz = grid_hz[best] + std::clamp(offset, -0.5, 0.5) * step;
    return est;
}

ToaMeasurement toa_from_spectrum(const fft::XcorrPlan& plan, const cvec& sig_spec, double kappa,
                                 int bs_id) {
    return measure_from_corr(fft::xcorr(plan, sig_spec), kappa, bs_id);
}

ToaMeasurement toa_estimate(const prs::IqSignal& sig, const prs::IqSignal& replica, double kappa,
                            int bs_id) {
    if (replica.samples.empty()) throw ParamError("toa: empty replica");
    if (replica.samples.size() > sig.samples.size())
        throw ParamError("toa: replica longer than signal");
    const std::size_t max_lag = sig.samples.size() - replica.samples.size();
    const auto plan = fft::make_xcorr_plan(replica.samples, max_lag);
    const auto sig_spec = fft::signal_spectrum(sig.samples, plan.fft_len);
    return toa_from_spectrum(plan, sig_spec, kappa, bs_id);
}

RstdSet compute_rstd(const std::vector<ToaMeasurement>& toas, int reference_bs, double fs) {
    if (fs <= 0.0) throw ParamError("rstd: invalid sample rate");
    const ToaMeasurement* ref = nullptr;
    const ToaMeasurement* strongest = nullptr;
    std::size_t n_detected = 0;
    for (const auto& m : toas) {
        if (!m.detected) continue;
        ++n_detected;
        if (m.bs_id == reference_bs) ref = &m;
        if (!strongest || std::norm(m.peak_value) > std::norm(strongest->peak_value))
            strongest = &m;
    }
    if (n_detected < 2) throw ParamError("rstd: fewer than 2 detected base stations");
    if (!ref) ref = strongest;

    RstdSet out;
    out.reference_bs = ref->bs_id;
    for (const auto& m : toas) {
        if (!m.detected) continue;
        out.values_s[m.bs_id] = static_cast<double>(m.sample_index - ref->sample_index) / fs;
    }
    return out;
}

CfoEstimate residual_cfo_correct(const cvec& slot_peaks, double slot_duration_s) {
    if (slot_duration_s <= 0.0) throw ParamError("cfo: invalid slot duration");
    if (slot_peaks.size() < 2) return {0.0, true};
    double sum = 0.0;
    for (std::size_t i = 1; i < slot_peaks.size(); ++i)
        sum += std::arg(slot_peaks[i] * std::conj(slot_peaks[i - 1]));
    const double mean_dphase = sum / static_cast<double>(slot_peaks.size() - 1);
    return {mean_dphase / (2.0 * kPi * slot_duration_s), false};
}

}  // namespace veriloc::receiver
