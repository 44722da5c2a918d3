#pragma once

#include "veriloc/adversary.hpp"
#include "veriloc/channel.hpp"
#include "veriloc/detect.hpp"
#include "veriloc/locate.hpp"
#include "veriloc/receiver.hpp"
#include "veriloc/scenario.hpp"
#include "veriloc/verdict.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>

namespace veriloc::harness {

struct SecurityToggles {
    bool encryption = false;
    bool hmac = false;
    bool ds = false;
    bool absa = false;
    bool handshake = false;
    bool tracking = false;
};

struct Thresholds {
    double success_m = 15.0;
    double delta_th_deg = 20.0;
    double epsilon_m = 20.0;
    double gamma = detect::kNisGate;
    int mofn_n = 2;
    double hearability_kappa = receiver::kHearabilityKappa;
};

struct SyntheticSpec {
    Point2 start{};
    std::vector<scenario::SyntheticLeg> legs;
    int n_points = 120;
};

struct ScenarioConfig {
    std::string profile = "test";  // "test" (30.72 MHz) or "full" (122.88 MHz)
    int n_slots = 2;               // slots transmitted per epoch
    int k_comb = 6;
    int num_symbols = 12;
    SecurityToggles security;
    std::string prs_key_hex = "000102030405060708090a0b0c0d0e0f";
    std::string hmac_key_hex = "101112131415161718191a1b1c1d1e1f";
    std::string ds_seed_hex;  // 64 hex chars
    std::uint64_t ldpc_seed = 7;
    adversary::AttackConfig attack;
    std::uint64_t topology_seed = 1;
    double isd_m = 500.0;
    std::string trajectory_path;  // empty -> synthetic
    SyntheticSpec synthetic;
    std::uint64_t master_seed = 1;
    Thresholds thresholds;
    channel::ChannelConfig chan;
    double target_rx_dbm = -75.0;
    double ul_sigma_m = 3.0;
    double doppler_span_hz = 400.0;
    double doppler_step_hz = 400.0;
    double kf_meas_sigma_m = 8.0;
    double kf_accel_sigma = 2.5;
    double ula_snr_db = 20.0;
    int ula_snapshots = 48;
};

ScenarioConfig default_config();
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& cfg);
ScenarioConfig load_config(const std::string& path);

/// Canonical order of technique names used in records and exports.
const std::vector<std::string>& technique_names();

struct EpochRecord {
    int epoch = 0;
    std::string phase;  // benign | attack | recovery
    Point2 truth{};
    bool attacked = false;
    int n_detected = 0;
    bool has_estimate = false;
    Point2 estimate{};
    locate::OutcomeClass outcome;
    std::map<std::string, DetectionVerdict> verdicts;  // enabled techniques only
};

struct TechniqueStats {
    int benign_n = 0;    // benign epochs counted (DoS excluded)
    int attacked_n = 0;  // attacked epochs counted
    double benign_correct_rate = 0.0;
    double attacked_correct_rate = 0.0;
    double false_alarm_rate = 0.0;
};

struct MetricsReport {
    struct Shares {
        int n = 0;
        double success = 0.0;
        double large_error = 0.0;
        double dos = 0.0;
    };
    std::map<std::string, Shares> phase_shares;
    std::map<std::string, TechniqueStats> techniques;
};

std::vector<EpochRecord> run_scenario(const ScenarioConfig& cfg);

MetricsReport aggregate(const std::vector<EpochRecord>& records, const ScenarioConfig& cfg);

void export_results(const std::vector<EpochRecord>& records, const MetricsReport& report,
                    const ScenarioConfig& cfg, const std::string& out_dir);

std::string epochs_csv(const std::vector<EpochRecord>& records);

/// Pure-noise Monte-Carlo of the correlation peak-to-floor ratio; returns the
/// threshold kappa with empirical false-detection rate <= target_rate.
double calibrate_hearability(int trials, double target_rate, std::uint64_t seed,
                             const std::string& profile = "test");

}  // namespace veriloc::harness
