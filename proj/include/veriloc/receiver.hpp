#pragma once

#include "veriloc/common.hpp"
#include "veriloc/fft.hpp"
#include "veriloc/prs.hpp"

#include <map>

namespace veriloc::receiver {

/// Detection threshold: peak power >= kappa * mean off-peak power. Calibrated
/// so that the pure-noise false-detection rate stays <= 1% at the 30.72 MHz
/// profile (see the threshold calibration tool).
inline constexpr double kHearabilityKappa = 12.0;

/// Floor estimation excludes this many lags on each side of the peak.
inline constexpr int kPeakGuardLags = 16;

struct ToaMeasurement {
    int bs_id = -1;
    std::int64_t sample_index = -1;
    cd peak_value{};
    double peak_to_floor_db = 0.0;
    bool detected = false;
};

struct RstdSet {
    int reference_bs = -1;
    std::map<int, double> values_s;  // bs id -> (toa_i - toa_ref)/fs
};

struct DopplerEstimate {
    double freq_hz = 0.0;
    bool at_grid_edge = false;
};

/// Maximizes max-lag |xcorr| over frequency hypotheses, then refines with a
/// parabola through the best metric and its neighbors.
DopplerEstimate coarse_doppler_estimate(const prs::IqSignal& sig, const prs::IqSignal& replica,
                                        const std::vector<double>& grid_hz);

std::vector<double> doppler_grid(double span_hz, double step_hz);

/// Derotate sig by -freq_hz.
prs::IqSignal derotate(const prs::IqSignal& sig, double freq_hz);

ToaMeasurement toa_estimate(const prs::IqSignal& sig, const prs::IqSignal& replica,
                            double kappa = kHearabilityKappa, int bs_id = -1);

/// Fast path reusing a replica plan and a shared signal spectrum (see fft).
ToaMeasurement toa_from_spectrum(const fft::XcorrPlan& plan, const cvec& sig_spec,
                                 double kappa = kHearabilityKappa, int bs_id = -1);

/// RSTD against reference_bs; falls back to the strongest detected peak when
/// the reference is undetected. Throws if fewer than 2 BSs are detected.
RstdSet compute_rstd(const std::vector<ToaMeasurement>& toas, int reference_bs, double fs);

struct CfoEstimate {
    double freq_hz = 0.0;
    bool single_slot = false;
};

/// Residual CFO from the mean phase advance between consecutive slot peaks.
CfoEstimate residual_cfo_correct(const cvec& slot_peaks, double slot_duration_s);

}  // namespace veriloc::receiver
