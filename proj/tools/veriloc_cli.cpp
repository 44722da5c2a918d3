#include "veriloc/harness.hpp"

#include "../vendor/CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using nlohmann::json;
namespace harness = veriloc::harness;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw veriloc::ParamError("cannot open config " + path);
    json j;
    in >> j;
    return j;
}

void print_summary(const harness::MetricsReport& report) {
    for (const auto& [phase, sh] : report.phase_shares) {
        if (sh.n == 0) continue;
        std::printf("%-9s n=%-4d success=%.3f large_error=%.3f dos=%.3f\n", phase.c_str(), sh.n,
                    sh.success, sh.large_error, sh.dos);
    }
    for (const auto& [name, st] : report.techniques) {
        std::printf("%-9s benign_fa=%.3f (n=%d)  attacked_correct=%.3f (n=%d)\n", name.c_str(),
                    st.false_alarm_rate, st.benign_n, st.attacked_correct_rate, st.attacked_n);
    }
}

/// Set a value at a dot-separated path ("attack.power_dbm") in a JSON tree.
void set_at_path(json& j, const std::string& path, const std::string& value) {
    std::string ptr = "/";
    for (char c : path) ptr += (c == '.') ? '/' : c;
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value;  // plain string
    }
    j[json::json_pointer(ptr)] = parsed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Positioning-security scenario simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, profile, param;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::vector<std::string> values;

    auto* run = app.add_subcommand("run", "Run a scenario and export results");
    run->add_option("--config", config_path, "Scenario config (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--seed", seed, "Override the master seed")->each([&](const std::string&) {
        seed_set = true;
    });
    run->add_option("--profile", profile, "Override the numerology profile")
        ->check(CLI::IsMember({"full", "test"}));

    auto* cal = app.add_subcommand("calibrate-threshold",
                                   "Calibrate the correlation hearability threshold");
    cal->add_option("--config", config_path, "Scenario config (JSON)")->required();

    auto* sweep = app.add_subcommand("sweep", "Run a scenario once per parameter value");
    sweep->add_option("--config", config_path, "Scenario config (JSON)")->required();
    sweep->add_option("--param", param, "Dot-separated config path, e.g. attack.power_dbm")
        ->required();
    sweep->add_option("--values", values, "Values to substitute at the path")->required();
    sweep->add_option("--out", out_dir, "Optional output root; one subdirectory per value");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            harness::ScenarioConfig cfg = harness::load_config(config_path);
            if (seed_set) cfg.master_seed = seed;
            if (!profile.empty()) cfg.profile = profile;
            const auto records = harness::run_scenario(cfg);
            const auto report = harness::aggregate(records, cfg);
            harness::export_results(records, report, cfg, out_dir);
            print_summary(report);
            std::printf("wrote %s/{epochs.csv,metrics.json,config_resolved.json}\n",
                        out_dir.c_str());
        } else if (cal->parsed()) {
            const harness::ScenarioConfig cfg = harness::load_config(config_path);
            const double kappa =
                harness::calibrate_hearability(200, 0.01, cfg.master_seed, cfg.profile);
            std::printf("hearability kappa for 1%% noise-only false detection: %.2f\n", kappa);
            std::printf("configured threshold: %.2f\n", cfg.thresholds.hearability_kappa);
        } else if (sweep->parsed()) {
            const json base = load_json(config_path);
            for (const auto& value : values) {
                json j = base;
                set_at_path(j, param, value);
                const harness::ScenarioConfig cfg = harness::config_from_json(j);
                const auto records = harness::run_scenario(cfg);
                const auto report = harness::aggregate(records, cfg);
                if (!out_dir.empty()) {
                    const auto dir = (std::filesystem::path(out_dir) / value).string();
                    harness::export_results(records, report, cfg, dir);
                }
                std::printf("== %s = %s ==\n", param.c_str(), value.c_str());
                print_summary(report);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
