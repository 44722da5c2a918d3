#include "veriloc/harness.hpp"

#include "veriloc/auth.hpp"
#include "veriloc/secure_prs.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace veriloc::harness {

using nlohmann::json;

namespace {

// per-purpose seed salts
enum : std::uint64_t { kSaltNoise = 1, kSaltJam = 2, kSaltUl = 3, kSaltUla = 4 };

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& scope) {
    if (!j.is_object()) throw ParamError("config: " + scope + " must be an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end())
            throw ParamError("config: unknown key '" + key + "' in " + scope);
    }
}

Point2 point_from_json(const json& j, const std::string& scope) {
    if (!j.is_array() || j.size() != 2) throw ParamError("config: " + scope + " must be [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<std::uint8_t> bytes_from_hex(const std::string& hex, const std::string& what) {
    if (hex.size() % 2 != 0) throw ParamError("config: odd hex length for " + what);
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto nib = [&](char c) -> unsigned {
            if (c >= '0' && c <= '9') return c - '0';
            if (c >= 'a' && c <= 'f') return c - 'a' + 10;
            if (c >= 'A' && c <= 'F') return c - 'A' + 10;
            throw ParamError("config: bad hex digit in " + what);
        };
        out[i] = static_cast<std::uint8_t>((nib(hex[2 * i]) << 4) | nib(hex[2 * i + 1]));
    }
    return out;
}

std::string attack_kind_name(adversary::AttackKind k) {
    switch (k) {
        case adversary::AttackKind::None: return "none";
        case adversary::AttackKind::FbsSpoof: return "fbs";
        case adversary::AttackKind::Meaconing: return "meaconing";
        case adversary::AttackKind::Jamming: return "jamming";
    }
    return "none";
}

adversary::AttackKind attack_kind_from_name(const std::string& s) {
    if (s == "none") return adversary::AttackKind::None;
    if (s == "fbs") return adversary::AttackKind::FbsSpoof;
    if (s == "meaconing") return adversary::AttackKind::Meaconing;
    if (s == "jamming") return adversary::AttackKind::Jamming;
    throw ParamError("config: unknown attack kind '" + s + "'");
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

const std::vector<std::string>& technique_names() {
    static const std::vector<std::string> names = {"hmac", "ds", "absa", "handshake", "tracking"};
    return names;
}

ScenarioConfig default_config() {
    ScenarioConfig cfg;
    cfg.ds_seed_hex = "202122232425262728292a2b2c2d2e2f303132333435363738393a3b3c3d3e3f";
    cfg.attack.phase_start = 30;
    cfg.attack.phase_end = 90;
    // Eastbound path with a slow stretch early in the attack window so a
    // trailing adversary closes to within tens of meters for a few epochs.
    cfg.synthetic.start = {0.0, 0.0};
    cfg.synthetic.legs = {{{300.0, 0.0}, 10.0},
                          {{380.0, 0.0}, 10.0},
                          {{400.0, 0.0}, 1.5},
                          {{1150.0, 0.0}, 10.0}};
    cfg.synthetic.n_points = 120;
    return cfg;
}

ScenarioConfig config_from_json(const json& j) {
    ScenarioConfig cfg = default_config();
    reject_unknown(j, {"profile", "n_slots", "prs", "security", "keys", "attack", "topology",
                       "trajectory", "seed", "thresholds", "channel", "receiver", "detect"},
                   "top level");
    get_if(j, "profile", cfg.profile);
    get_if(j, "n_slots", cfg.n_slots);
    get_if(j, "seed", cfg.master_seed);

    if (j.contains("prs")) {
        const auto& p = j.at("prs");
        reject_unknown(p, {"k_comb", "num_symbols"}, "prs");
        get_if(p, "k_comb", cfg.k_comb);
        get_if(p, "num_symbols", cfg.num_symbols);
    }
    if (j.contains("security")) {
        const auto& s = j.at("security");
        reject_unknown(s, {"encryption", "hmac", "ds", "absa", "handshake", "tracking"},
                       "security");
        get_if(s, "encryption", cfg.security.encryption);
        get_if(s, "hmac", cfg.security.hmac);
        get_if(s, "ds", cfg.security.ds);
        get_if(s, "absa", cfg.security.absa);
        get_if(s, "handshake", cfg.security.handshake);
        get_if(s, "tracking", cfg.security.tracking);
    }
    if (j.contains("keys")) {
        const auto& k = j.at("keys");
        reject_unknown(k, {"prs_key_hex", "hmac_key_hex", "ds_seed_hex", "ldpc_seed"}, "keys");
        get_if(k, "prs_key_hex", cfg.prs_key_hex);
        get_if(k, "hmac_key_hex", cfg.hmac_key_hex);
        get_if(k, "ds_seed_hex", cfg.ds_seed_hex);
        get_if(k, "ldpc_seed", cfg.ldpc_seed);
    }
    if (j.contains("attack")) {
        const auto& a = j.at("attack");
        reject_unknown(a,
                       {"kind", "power_dbm", "lag_points", "spoof_offset_m", "processing_delay_s",
                        "phase_start", "phase_end"},
                       "attack");
        if (a.contains("kind")) cfg.attack.kind = attack_kind_from_name(a.at("kind"));
        get_if(a, "power_dbm", cfg.attack.power_dbm);
        get_if(a, "lag_points", cfg.attack.lag_points);
        if (a.contains("spoof_offset_m"))
            cfg.attack.spoof_offset_m = point_from_json(a.at("spoof_offset_m"), "spoof_offset_m");
        get_if(a, "processing_delay_s", cfg.attack.meacon_processing_delay_s);
        get_if(a, "phase_start", cfg.attack.phase_start);
        get_if(a, "phase_end", cfg.attack.phase_end);
    }
    if (j.contains("topology")) {
        const auto& t = j.at("topology");
        reject_unknown(t, {"seed", "isd_m"}, "topology");
        get_if(t, "seed", cfg.topology_seed);
        get_if(t, "isd_m", cfg.isd_m);
    }
    if (j.contains("trajectory")) {
        const auto& t = j.at("trajectory");
        reject_unknown(t, {"path", "synthetic"}, "trajectory");
        get_if(t, "path", cfg.trajectory_path);
        if (t.contains("synthetic")) {
            const auto& s = t.at("synthetic");
            reject_unknown(s, {"start", "legs", "n_points"}, "trajectory.synthetic");
            if (s.contains("start")) cfg.synthetic.start = point_from_json(s.at("start"), "start");
            get_if(s, "n_points", cfg.synthetic.n_points);
            if (s.contains("legs")) {
                cfg.synthetic.legs.clear();
                for (const auto& leg : s.at("legs")) {
                    reject_unknown(leg, {"waypoint", "speed_mps"}, "trajectory.synthetic.legs[]");
                    scenario::SyntheticLeg l;
                    l.waypoint = point_from_json(leg.at("waypoint"), "waypoint");
                    if (leg.contains("speed_mps")) l.speed_mps = leg.at("speed_mps").get<double>();
                    cfg.synthetic.legs.push_back(l);
                }
            }
        }
    }
    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        reject_unknown(t,
                       {"success_m", "delta_th_deg", "epsilon_m", "gamma", "mofn_n",
                        "hearability_kappa"},
                       "thresholds");
        get_if(t, "success_m", cfg.thresholds.success_m);
        get_if(t, "delta_th_deg", cfg.thresholds.delta_th_deg);
        get_if(t, "epsilon_m", cfg.thresholds.epsilon_m);
        get_if(t, "gamma", cfg.thresholds.gamma);
        get_if(t, "mofn_n", cfg.thresholds.mofn_n);
        get_if(t, "hearability_kappa", cfg.thresholds.hearability_kappa);
    }
    if (j.contains("channel")) {
        const auto& c = j.at("channel");
        reject_unknown(c,
                       {"fc_hz", "noise_figure_db", "tx_cap_dbm", "bs_height_m", "ue_height_m",
                        "target_rx_dbm"},
                       "channel");
        get_if(c, "fc_hz", cfg.chan.fc_hz);
        get_if(c, "noise_figure_db", cfg.chan.noise_figure_db);
        get_if(c, "tx_cap_dbm", cfg.chan.tx_cap_dbm);
        get_if(c, "bs_height_m", cfg.chan.bs_height_m);
        get_if(c, "ue_height_m", cfg.chan.ue_height_m);
        get_if(c, "target_rx_dbm", cfg.target_rx_dbm);
    }
    if (j.contains("receiver")) {
        const auto& r = j.at("receiver");
        reject_unknown(r, {"doppler_span_hz", "doppler_step_hz", "ul_sigma_m"}, "receiver");
        get_if(r, "doppler_span_hz", cfg.doppler_span_hz);
        get_if(r, "doppler_step_hz", cfg.doppler_step_hz);
        get_if(r, "ul_sigma_m", cfg.ul_sigma_m);
    }
    if (j.contains("detect")) {
        const auto& d = j.at("detect");
        reject_unknown(d, {"kf_meas_sigma_m", "kf_accel_sigma", "ula_snr_db", "ula_snapshots"},
                       "detect");
        get_if(d, "kf_meas_sigma_m", cfg.kf_meas_sigma_m);
        get_if(d, "kf_accel_sigma", cfg.kf_accel_sigma);
        get_if(d, "ula_snr_db", cfg.ula_snr_db);
        get_if(d, "ula_snapshots", cfg.ula_snapshots);
    }
    return cfg;
}

json config_to_json(const ScenarioConfig& cfg) {
    json j;
    j["profile"] = cfg.profile;
    j["n_slots"] = cfg.n_slots;
    j["seed"] = cfg.master_seed;
    j["prs"] = {{"k_comb", cfg.k_comb}, {"num_symbols", cfg.num_symbols}};
    j["security"] = {{"encryption", cfg.security.encryption}, {"hmac", cfg.security.hmac},
                     {"ds", cfg.security.ds},                 {"absa", cfg.security.absa},
                     {"handshake", cfg.security.handshake},   {"tracking", cfg.security.tracking}};
    j["keys"] = {{"prs_key_hex", cfg.prs_key_hex},
                 {"hmac_key_hex", cfg.hmac_key_hex},
                 {"ds_seed_hex", cfg.ds_seed_hex},
                 {"ldpc_seed", cfg.ldpc_seed}};
    j["attack"] = {{"kind", attack_kind_name(cfg.attack.kind)},
                   {"power_dbm", cfg.attack.power_dbm},
                   {"lag_points", cfg.attack.lag_points},
                   {"spoof_offset_m", {cfg.attack.spoof_offset_m.x, cfg.attack.spoof_offset_m.y}},
                   {"processing_delay_s", cfg.attack.meacon_processing_delay_s},
                   {"phase_start", cfg.attack.phase_start},
                   {"phase_end", cfg.attack.phase_end}};
    j["topology"] = {{"seed", cfg.topology_seed}, {"isd_m", cfg.isd_m}};
    json legs = json::array();
    for (const auto& l : cfg.synthetic.legs)
        legs.push_back({{"waypoint", {l.waypoint.x, l.waypoint.y}}, {"speed_mps", l.speed_mps}});
    j["trajectory"] = {{"path", cfg.trajectory_path},
                       {"synthetic",
                        {{"start", {cfg.synthetic.start.x, cfg.synthetic.start.y}},
                         {"legs", legs},
                         {"n_points", cfg.synthetic.n_points}}}};
    j["thresholds"] = {{"success_m", cfg.thresholds.success_m},
                       {"delta_th_deg", cfg.thresholds.delta_th_deg},
                       {"epsilon_m", cfg.thresholds.epsilon_m},
                       {"gamma", cfg.thresholds.gamma},
                       {"mofn_n", cfg.thresholds.mofn_n},
                       {"hearability_kappa", cfg.thresholds.hearability_kappa}};
    j["channel"] = {{"fc_hz", cfg.chan.fc_hz},
                    {"noise_figure_db", cfg.chan.noise_figure_db},
                    {"tx_cap_dbm", cfg.chan.tx_cap_dbm},
                    {"bs_height_m", cfg.chan.bs_height_m},
                    {"ue_height_m", cfg.chan.ue_height_m},
                    {"target_rx_dbm", cfg.target_rx_dbm}};
    j["receiver"] = {{"doppler_span_hz", cfg.doppler_span_hz},
                     {"doppler_step_hz", cfg.doppler_step_hz},
                     {"ul_sigma_m", cfg.ul_sigma_m}};
    j["detect"] = {{"kf_meas_sigma_m", cfg.kf_meas_sigma_m},
                   {"kf_accel_sigma", cfg.kf_accel_sigma},
                   {"ula_snr_db", cfg.ula_snr_db},
                   {"ula_snapshots", cfg.ula_snapshots}};
    return j;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParamError("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParamError("config: JSON parse error in " + path + ": " + e.what());
    }
    return config_from_json(j);
}

namespace {

struct Runtime {
    prs::Numerology num;
    scenario::Trajectory traj;
    scenario::Topology topo;
    std::array<std::uint8_t, 16> aes_key{};
    std::optional<auth::AuthScheme> scheme;
    std::optional<auth::LdpcCode> code;
    double noise_power = 0.0;  // linear, 0 dBm == 1
    bool tags = false;
};

int prs_offset(const ScenarioConfig& cfg, int rank) {
    if (cfg.k_comb % 3 == 0) return rank * (cfg.k_comb / 3);
    if (cfg.k_comb >= 3) return rank;
    throw ParamError("config: comb size too small for 3 serving base stations");
}

int tag_offset(const ScenarioConfig& cfg, int rank) {
    if (cfg.k_comb < 6)
        throw ParamError(
            "config: comb size below 6 cannot carry tags for 3 base stations");
    return prs_offset(cfg, rank) + 1;
}

Runtime prepare(const ScenarioConfig& cfg) {
    Runtime rt;
    if (cfg.profile == "test")
        rt.num = prs::test_profile();
    else if (cfg.profile == "full")
        rt.num = prs::full_profile();
    else
        throw ParamError("config: profile must be 'test' or 'full'");
    if (cfg.n_slots < 1) throw ParamError("config: n_slots must be >= 1");
    if (cfg.security.hmac && cfg.security.ds)
        throw ParamError("config: enable at most one tag scheme (hmac or ds)");
    rt.tags = cfg.security.hmac || cfg.security.ds;
    if (rt.tags) tag_offset(cfg, 2);  // validates capacity up front

    if (!cfg.trajectory_path.empty())
        rt.traj = scenario::load_trajectory(cfg.trajectory_path);
    else
        rt.traj = scenario::synthetic_trajectory(cfg.synthetic.start, cfg.synthetic.legs,
                                                 cfg.synthetic.n_points);
    if (cfg.attack.phase_start < 0 || cfg.attack.phase_end > int(rt.traj.size()) ||
        cfg.attack.phase_start > cfg.attack.phase_end)
        throw ParamError("config: attack phase window outside trajectory");

    double extent = 0.0;
    for (const auto& p : rt.traj) extent = std::max(extent, norm(p.xy_m));
    rt.topo = scenario::build_topology(extent + cfg.isd_m, cfg.topology_seed, cfg.isd_m);

    rt.aes_key = crypto::key_from_hex(cfg.prs_key_hex);
    if (cfg.security.hmac) {
        rt.scheme = auth::AuthScheme::hmac(bytes_from_hex(cfg.hmac_key_hex, "hmac key"));
    } else if (cfg.security.ds) {
        const auto seed_bytes = bytes_from_hex(cfg.ds_seed_hex, "signature seed");
        if (seed_bytes.size() != 32) throw ParamError("config: ds_seed_hex must be 32 bytes");
        std::array<std::uint8_t, 32> seed{};
        std::copy(seed_bytes.begin(), seed_bytes.end(), seed.begin());
        rt.scheme = auth::AuthScheme::signature_from_seed(seed);
    }
    if (rt.scheme) rt.code.emplace(rt.scheme->tag_bits, cfg.ldpc_seed);

    rt.noise_power = db_to_lin(channel::noise_psd_dbm_hz(cfg.chan.noise_figure_db) +
                               10.0 * std::log10(rt.num.sample_rate_hz));
    return rt;
}

std::vector<std::uint8_t> slot_bits(const ScenarioConfig& cfg, const Runtime& rt,
                                    const prs::PrsConfig& pcfg, int bs_id, int frame, int slot) {
    auto bits = prs::prs_slot_bits(pcfg, rt.num, slot);
    if (cfg.security.encryption) {
        crypto::KeyMaterial km;
        km.key = rt.aes_key;
        km.nonce = crypto::make_nonce(static_cast<std::uint32_t>(bs_id),
                                      static_cast<std::uint32_t>(frame),
                                      static_cast<std::uint16_t>(slot));
        const auto ks = crypto::keystream(km, bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) bits[i] ^= ks[i];
    }
    return bits;
}

/// Transmit waveform of one BS for this epoch: n_slots slots, optional
/// encryption and embedded tag, unit average power.
prs::IqSignal bs_waveform(const ScenarioConfig& cfg, const Runtime& rt,
                          const prs::PrsConfig& pcfg, int rank, int bs_id, int frame) {
    prs::IqSignal tx;
    tx.sample_rate_hz = rt.num.sample_rate_hz;
    for (int s = 0; s < cfg.n_slots; ++s) {
        const auto bits = slot_bits(cfg, rt, pcfg, bs_id, frame, s);
        auto grid = prs::grid_from_bits(bits, pcfg, rt.num, s, frame);
        if (rt.tags) {
            const auto msg = auth::build_auth_message(bs_id, frame, s, pcfg.n_id_seq);
            const auto tag = auth::compute_tag(*rt.scheme, msg);
            const auto coded = rt.code->encode(auth::bytes_to_bits(tag));
            const auto map =
                auth::make_embedding_map(tag_offset(cfg, rank), cfg.k_comb, rt.num,
                                         pcfg.start_symbol, pcfg.num_symbols,
                                         static_cast<int>(coded.size()));
            grid = auth::embed_tag(grid, map, coded);
        }
        const auto slot_sig = prs::ofdm_modulate(grid, rt.num);
        tx.samples.insert(tx.samples.end(), slot_sig.samples.begin(), slot_sig.samples.end());
    }
    return channel::normalized(tx);
}

/// Receiver's local replica for one BS: first slot, PRS cells only.
prs::IqSignal bs_replica(const ScenarioConfig& cfg, const Runtime& rt,
                         const prs::PrsConfig& pcfg, int bs_id, int frame) {
    const auto bits = slot_bits(cfg, rt, pcfg, bs_id, frame, 0);
    const auto grid = prs::grid_from_bits(bits, pcfg, rt.num, 0, frame);
    return prs::ofdm_modulate(grid, rt.num);
}

/// Per-symbol amplitude + linear-phase equalizer estimated from the BS's own
/// PRS cells; corrects channel phase, residual CFO, and +-1 sample timing.
struct SymbolEq {
    cd gain{};     // complex gain at subcarrier 0
    double slope;  // phase per subcarrier index
};

std::vector<double> tag_llrs(const prs::ResourceGrid& rx, const prs::PrsConfig& pcfg,
                             const std::vector<std::uint8_t>& bits,
                             const auth::EmbeddingMap& map, const prs::Numerology& num,
                             double noise_var) {
    const int res = prs::prs_res_per_symbol(pcfg, num);
    std::vector<SymbolEq> eq(num.symbols_per_slot, SymbolEq{cd{0.0, 0.0}, 0.0});
    std::size_t pos = 0;
    for (int l = pcfg.start_symbol; l < pcfg.start_symbol + pcfg.num_symbols; ++l) {
        std::vector<std::uint8_t> sym_bits(bits.begin() + pos, bits.begin() + pos + 2 * res);
        pos += 2 * res;
        const cvec expected = prs::qpsk_map(sym_bits);
        cvec z(res);  // rx * conj(expected) at each comb position
        for (int m = 0; m < res; ++m)
            z[m] = rx.at(pcfg.k_offset + m * pcfg.k_comb, l) * std::conj(expected[m]);
        cd acc{0.0, 0.0};
        for (int m = 0; m + 1 < res; ++m) acc += z[m + 1] * std::conj(z[m]);
        const double slope = std::arg(acc) / pcfg.k_comb;  // phase per subcarrier
        cd gain{0.0, 0.0};
        for (int m = 0; m < res; ++m) {
            const int k = pcfg.k_offset + m * pcfg.k_comb;
            gain += z[m] * std::polar(1.0, -slope * k);
        }
        gain /= static_cast<double>(res);
        eq[l] = {gain, slope};
    }

    const double nv = std::max(noise_var, 1e-30);
    std::vector<double> llrs(2 * map.re_indices.size());
    for (std::size_t i = 0; i < map.re_indices.size(); ++i) {
        const auto [k, l] = map.re_indices[i];
        const SymbolEq& e = eq[l];
        const double g2 = std::norm(e.gain);
        if (g2 <= 0.0) {
            llrs[2 * i] = llrs[2 * i + 1] = 0.0;
            continue;
        }
        const cd y = rx.at(k, l) * std::polar(1.0, -e.slope * k) * std::conj(e.gain) / g2;
        const double scale = 2.0 * std::sqrt(2.0) / (nv / g2);
        llrs[2 * i] = scale * y.real();
        llrs[2 * i + 1] = scale * y.imag();
    }
    return llrs;
}

std::string phase_name(const ScenarioConfig& cfg, int epoch) {
    if (epoch < cfg.attack.phase_start) return "benign";
    if (epoch < cfg.attack.phase_end) return "attack";
    return "recovery";
}

}  // namespace

std::vector<EpochRecord> run_scenario(const ScenarioConfig& cfg) {
    Runtime rt = prepare(cfg);
    const double fs = rt.num.sample_rate_hz;
    const int slot_len = rt.num.slot_samples();
    const std::size_t out_len = static_cast<std::size_t>(cfg.n_slots) * slot_len + 2048;
    const auto grid_hz = receiver::doppler_grid(cfg.doppler_span_hz, cfg.doppler_step_hz);

    channel::ChannelConfig atk_chan = cfg.chan;
    atk_chan.bs_height_m = cfg.chan.ue_height_m;  // ground-level adversary

    detect::TrackState track = detect::kf_init(rt.traj.front().xy_m, 10.0, 5.0);
    track.gate_gamma = cfg.thresholds.gamma;
    track.mofn_n = cfg.thresholds.mofn_n;
    Point2 last_known = rt.traj.front().xy_m;

    std::vector<EpochRecord> records;
    records.reserve(rt.traj.size());

    for (int epoch = 0; epoch < static_cast<int>(rt.traj.size()); ++epoch) {
        const auto& pt = rt.traj[epoch];
        EpochRecord rec;
        rec.epoch = epoch;
        rec.phase = phase_name(cfg, epoch);
        rec.truth = pt.xy_m;
        rec.attacked = cfg.attack.kind != adversary::AttackKind::None &&
                       epoch >= cfg.attack.phase_start && epoch < cfg.attack.phase_end;

        const auto serving = scenario::serving_bs(rt.topo, pt.xy_m);
        std::vector<Point2> bs_pos;
        std::vector<int> bs_ids(serving.begin(), serving.end());
        for (int id : serving) bs_pos.push_back(rt.topo.bs_positions[id]);

        std::vector<prs::PrsConfig> pcfgs(3);
        for (int r = 0; r < 3; ++r) {
            pcfgs[r].n_id_seq = serving[r] % 4096;
            pcfgs[r].k_comb = cfg.k_comb;
            pcfgs[r].k_offset = prs_offset(cfg, r);
            pcfgs[r].num_symbols = cfg.num_symbols;
        }

        // legitimate downlink
        std::vector<channel::LinkState> links;
        for (int r = 0; r < 3; ++r)
            links.push_back(channel::make_link(bs_pos[r], pt.xy_m, pt.velocity_mps, cfg.chan));
        channel::power_control(links, cfg.target_rx_dbm, cfg.chan.tx_cap_dbm);

        std::vector<prs::IqSignal> components;
        std::vector<prs::IqSignal> tx_waveforms(3);
        for (int r = 0; r < 3; ++r) {
            tx_waveforms[r] = bs_waveform(cfg, rt, pcfgs[r], r, serving[r], epoch);
            components.push_back(channel::apply_link(tx_waveforms[r], links[r]));
        }

        // adversary
        double attacker_rx_dbm = -300.0;
        Point2 att_pos{};
        if (rec.attacked) {
            att_pos = adversary::attacker_position(rt.traj, epoch, cfg.attack.lag_points);
            const int att_idx = std::max(0, epoch - cfg.attack.lag_points);
            const Point2 att_vel = rt.traj[att_idx].velocity_mps;
            channel::LinkState att_link =
                channel::make_link(att_pos, pt.xy_m, pt.velocity_mps, atk_chan);
            att_link.tx_power_dbm = 0.0;  // waveforms below carry their own power

            prs::IqSignal atk_wf;
            switch (cfg.attack.kind) {
                case adversary::AttackKind::FbsSpoof: {
                    const Point2 fake = att_pos + cfg.attack.spoof_offset_m;
                    const auto delays = adversary::fbs_spoof_delays(fake, bs_pos);
                    // replica PRS with standard (unencrypted, untagged) parameters
                    atk_wf = adversary::gen_fbs_waveform(pcfgs, delays, rt.num, 0, cfg.n_slots,
                                                         epoch);
                    const double p = channel::avg_power(atk_wf);
                    if (p > 0.0) {
                        const double scale =
                            std::pow(10.0, cfg.attack.power_dbm / 20.0) / std::sqrt(p);
                        for (auto& v : atk_wf.samples) v *= scale;
                    }
                    break;
                }
                case adversary::AttackKind::Meaconing: {
                    std::vector<prs::IqSignal> at_attacker;
                    for (int r = 0; r < 3; ++r) {
                        channel::LinkState cap =
                            channel::make_link(bs_pos[r], att_pos, att_vel, cfg.chan);
                        cap.tx_power_dbm = links[r].tx_power_dbm;
                        at_attacker.push_back(channel::apply_link(tx_waveforms[r], cap));
                    }
                    prs::IqSignal captured = channel::superpose_with_noise(
                        at_attacker, -400.0, fs, 0, out_len, fs);  // noise-free capture
                    const double p = channel::avg_power(captured);
                    const double gain_db =
                        (p > 0.0) ? cfg.attack.power_dbm - lin_to_db(p) : 0.0;
                    atk_wf = adversary::gen_meacon_waveform(captured, gain_db,
                                                            cfg.attack.meacon_processing_delay_s);
                    break;
                }
                case adversary::AttackKind::Jamming:
                    atk_wf = adversary::gen_jam_waveform(
                        out_len, cfg.attack.power_dbm, fs,
                        mix_seed(cfg.master_seed, kSaltJam * 1000003 + epoch));
                    break;
                case adversary::AttackKind::None:
                    break;
            }
            if (!atk_wf.samples.empty()) {
                components.push_back(channel::apply_link(atk_wf, att_link));
                attacker_rx_dbm = cfg.attack.power_dbm - att_link.pathloss_db;
            }
        }

        const prs::IqSignal composite = channel::superpose_with_noise(
            components, channel::noise_psd_dbm_hz(cfg.chan.noise_figure_db), fs,
            mix_seed(cfg.master_seed, kSaltNoise * 1000003 + epoch), out_len, fs);

        // receiver chain
        std::vector<receiver::ToaMeasurement> toas;
        std::vector<prs::IqSignal> derotated(3);
        for (int r = 0; r < 3; ++r) {
            const auto replica = bs_replica(cfg, rt, pcfgs[r], serving[r], epoch);
            const auto dop = receiver::coarse_doppler_estimate(composite, replica, grid_hz);
            derotated[r] = receiver::derotate(composite, dop.freq_hz);
            toas.push_back(receiver::toa_estimate(derotated[r], replica,
                                                  cfg.thresholds.hearability_kappa, serving[r]));
        }
        rec.n_detected = static_cast<int>(
            std::count_if(toas.begin(), toas.end(), [](const auto& t) { return t.detected; }));

        locate::PositionEstimate est;
        if (rec.n_detected >= 3) {
            try {
                const auto rstd = receiver::compute_rstd(toas, serving[0], fs);
                Point2 centroid{};
                for (const auto& p : bs_pos) centroid = centroid + (1.0 / 3.0) * p;
                est = locate::multilaterate(rstd, bs_pos, bs_ids, centroid);
            } catch (const ParamError&) {
                est = {};
            }
        }
        rec.has_estimate = est.converged;
        if (est.converged) rec.estimate = est.xy_m;
        rec.outcome = locate::classify_outcome(est, pt.xy_m, cfg.thresholds.success_m);

        // integrity checks
        if (rt.tags) {
            DetectionVerdict v;
            v.technique = cfg.security.hmac ? "hmac" : "ds";
            int verified = 0;
            for (int r = 0; r < 3; ++r) {
                if (!toas[r].detected) continue;
                const std::size_t off = static_cast<std::size_t>(toas[r].sample_index);
                if (off + slot_len > derotated[r].samples.size()) continue;
                const auto rx_grid = prs::ofdm_demodulate(derotated[r], rt.num, off);
                const auto bits = slot_bits(cfg, rt, pcfgs[r], serving[r], epoch, 0);
                const auto map = auth::make_embedding_map(tag_offset(cfg, r), cfg.k_comb, rt.num,
                                                          pcfgs[r].start_symbol,
                                                          pcfgs[r].num_symbols, rt.code->n());
                const auto llrs = tag_llrs(rx_grid, pcfgs[r], bits, map, rt.num, rt.noise_power);
                const auto [cw, converged] = rt.code->decode(llrs);
                if (!converged) continue;
                const auto tag = auth::bits_to_bytes(rt.code->extract_info(cw));
                const auto msg =
                    auth::build_auth_message(serving[r], epoch, 0, pcfgs[r].n_id_seq);
                if (auth::verify_tag(*rt.scheme, msg, tag)) ++verified;
            }
            v.diagnostic = verified;
            v.valid = verified == 3;
            if (!v.valid) v.reason = "tag verification failure";
            rec.verdicts[v.technique] = v;
        }

        if (cfg.security.absa) {
            detect::UlaConfig ula;
            ula.snapshots = cfg.ula_snapshots;
            DetectionVerdict v;
            v.technique = "absa";
            v.valid = true;
            for (int r = 0; r < 3; ++r) {
                const double legit_rx_dbm = links[r].tx_power_dbm - links[r].pathloss_db;
                const bool adversary_dominant = rec.attacked && attacker_rx_dbm > legit_rx_dbm;
                const Point2 src = adversary_dominant ? att_pos : bs_pos[r];
                if (dist(src, pt.xy_m) < 1e-6) continue;  // co-located: bearing undefined
                detect::UlaSource source;
                source.azimuth_deg = detect::reference_angle(pt.xy_m, src);
                source.amplitude = std::pow(10.0, cfg.ula_snr_db / 20.0);
                const auto snap = detect::ula_snapshots(
                    {source}, ula, 1.0,
                    mix_seed(cfg.master_seed, kSaltUla * 1000003 + epoch * 4 + r));
                const auto angles = detect::esprit_azimuth(snap, 1);
                detect::AngleGate gate;
                gate.delta_th_deg = cfg.thresholds.delta_th_deg;
                gate.theta_ref_deg = detect::reference_angle(last_known, bs_pos[r]);
                const auto check = detect::absa_check(
                    angles.empty() ? std::nullopt : std::optional<double>(angles.front()), gate);
                v.diagnostic = std::max(v.diagnostic, check.diagnostic);
                if (!check.valid) {
                    v.valid = false;
                    v.reason = check.reason;
                }
            }
            rec.verdicts["absa"] = v;
        }

        if (cfg.security.handshake) {
            detect::HandshakeGate gate;
            gate.epsilon_m = cfg.thresholds.epsilon_m;
            gate.ul_sigma_m = cfg.ul_sigma_m;
            const Point2 p_ul = detect::ul_position_model(
                pt.xy_m, gate, mix_seed(cfg.master_seed, kSaltUl * 1000003 + epoch));
            rec.verdicts["handshake"] = detect::handshake_check(
                est.converged ? std::optional<Point2>(est.xy_m) : std::nullopt, p_ul, gate);
        }

        if (cfg.security.tracking) {
            detect::kf_predict(track, 1.0, cfg.kf_accel_sigma);
            rec.verdicts["tracking"] = detect::kf_update_gated(
                track, est.converged ? std::optional<Point2>(est.xy_m) : std::nullopt,
                cfg.kf_meas_sigma_m);
        }

        if (est.converged) last_known = est.xy_m;

        records.push_back(std::move(rec));
    }
    return records;
}

MetricsReport aggregate(const std::vector<EpochRecord>& records, const ScenarioConfig& cfg) {
    if (records.empty()) throw ParamError("aggregate: no records");
    MetricsReport report;
    for (const char* ph : {"benign", "attack", "recovery"}) report.phase_shares[ph] = {};
    for (const auto& rec : records) {
        auto& sh = report.phase_shares[rec.phase];
        ++sh.n;
        switch (rec.outcome.kind) {
            case locate::Outcome::Success: sh.success += 1.0; break;
            case locate::Outcome::LargeError: sh.large_error += 1.0; break;
            case locate::Outcome::DoS: sh.dos += 1.0; break;
        }
    }
    for (auto& [_, sh] : report.phase_shares) {
        if (sh.n == 0) continue;
        sh.success /= sh.n;
        sh.large_error /= sh.n;
        sh.dos /= sh.n;
    }

    for (const auto& name : technique_names()) {
        TechniqueStats stats;
        int benign_correct = 0, attacked_correct = 0;
        for (const auto& rec : records) {
            const auto it = rec.verdicts.find(name);
            if (it == rec.verdicts.end()) continue;
            if (rec.attacked) {
                ++stats.attacked_n;
                if (!it->second.valid) ++attacked_correct;
            } else {
                // benign false alarms exclude epochs lost to low signal quality
                if (rec.outcome.kind == locate::Outcome::DoS) continue;
                ++stats.benign_n;
                if (it->second.valid) ++benign_correct;
            }
        }
        if (stats.benign_n == 0 && stats.attacked_n == 0) continue;
        if (stats.benign_n > 0) {
            stats.benign_correct_rate = double(benign_correct) / stats.benign_n;
            stats.false_alarm_rate = 1.0 - stats.benign_correct_rate;
        }
        if (stats.attacked_n > 0)
            stats.attacked_correct_rate = double(attacked_correct) / stats.attacked_n;
        report.techniques[name] = stats;
    }
    (void)cfg;
    return report;
}

std::string epochs_csv(const std::vector<EpochRecord>& records) {
    std::ostringstream out;
    out << "epoch,phase,attacked,truth_x_m,truth_y_m,n_detected,outcome,error_m,est_x_m,est_y_m";
    for (const auto& name : technique_names()) out << "," << name << "_valid," << name << "_diag";
    out << "\n";
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const auto& rec : records) {
        out << rec.epoch << "," << rec.phase << "," << (rec.attacked ? 1 : 0) << ","
            << rec.truth.x << "," << rec.truth.y << "," << rec.n_detected << ",";
        switch (rec.outcome.kind) {
            case locate::Outcome::Success: out << "success"; break;
            case locate::Outcome::LargeError: out << "large_error"; break;
            case locate::Outcome::DoS: out << "dos"; break;
        }
        out << ",";
        if (rec.has_estimate)
            out << rec.outcome.error_m << "," << rec.estimate.x << "," << rec.estimate.y;
        else
            out << ",,";
        for (const auto& name : technique_names()) {
            const auto it = rec.verdicts.find(name);
            if (it == rec.verdicts.end())
                out << ",,";
            else
                out << "," << (it->second.valid ? 1 : 0) << "," << it->second.diagnostic;
        }
        out << "\n";
    }
    return out.str();
}

void export_results(const std::vector<EpochRecord>& records, const MetricsReport& report,
                    const ScenarioConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ParamError("export: cannot create " + out_dir + ": " + ec.message());

    {
        std::ofstream out(fs::path(out_dir) / "epochs.csv");
        if (!out) throw ParamError("export: cannot write epochs.csv in " + out_dir);
        out << epochs_csv(records);
    }
    {
        json j;
        for (const auto& [phase, sh] : report.phase_shares)
            j["phase_shares"][phase] = {{"n", sh.n},
                                        {"success", sh.success},
                                        {"large_error", sh.large_error},
                                        {"dos", sh.dos}};
        for (const auto& [name, st] : report.techniques)
            j["techniques"][name] = {{"benign_n", st.benign_n},
                                     {"attacked_n", st.attacked_n},
                                     {"benign_correct_rate", st.benign_correct_rate},
                                     {"attacked_correct_rate", st.attacked_correct_rate},
                                     {"false_alarm_rate", st.false_alarm_rate}};
        std::ofstream out(fs::path(out_dir) / "metrics.json");
        if (!out) throw ParamError("export: cannot write metrics.json in " + out_dir);
        out << j.dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(out_dir) / "config_resolved.json");
        if (!out) throw ParamError("export: cannot write config_resolved.json in " + out_dir);
        out << config_to_json(cfg).dump(2) << "\n";
    }
}

double calibrate_hearability(int trials, double target_rate, std::uint64_t seed,
                             const std::string& profile) {
    if (trials < 10) throw ParamError("calibrate: need at least 10 trials");
    if (target_rate <= 0.0 || target_rate >= 1.0) throw ParamError("calibrate: bad target rate");
    const prs::Numerology num = (profile == "full") ? prs::full_profile() : prs::test_profile();

    prs::PrsConfig pcfg;
    pcfg.n_id_seq = 42;
    pcfg.k_comb = 6;
    const auto grid = prs::generate_prs_grid(pcfg, num, 0, 0);
    const auto replica = prs::ofdm_modulate(grid, num);
    const std::size_t sig_len = replica.samples.size() + 4096;

    std::vector<double> ratios;
    ratios.reserve(trials);
    for (int t = 0; t < trials; ++t) {
        const auto noise = channel::superpose_with_noise(
            {}, -80.0, num.sample_rate_hz, mix_seed(seed, 5000 + t), sig_len,
            num.sample_rate_hz);
        const auto m = receiver::toa_estimate(noise, replica, 1e12);
        ratios.push_back(db_to_lin(m.peak_to_floor_db));
    }
    std::sort(ratios.begin(), ratios.end());
    const auto idx = static_cast<std::size_t>(
        std::min<double>(ratios.size() - 1.0, std::ceil((1.0 - target_rate) * ratios.size())));
    return ratios[idx];
}

}  // namespace veriloc::harness
