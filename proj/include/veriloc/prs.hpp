#pragma once

#include "veriloc/common.hpp"

#include <set>

namespace veriloc::prs {

/// OFDM numerology and sampling profile. Normal cyclic prefix only.
struct Numerology {
    int mu = 0;
    double scs_hz = 15e3;
    int n_fft = 2048;
    double sample_rate_hz = 30.72e6;
    int n_prb = 52;
    std::vector<int> cp_lengths;  // per symbol, samples
    int symbols_per_slot = 14;
    int slots_per_frame = 10;

    int active_subcarriers() const { return 12 * n_prb; }
    int slot_samples() const;
    double slot_duration_s() const { return slot_samples() / sample_rate_hz; }

    void validate() const;
};

/// mu=0, 10 MHz (52 PRB), 30.72 MHz sampling. Used by all acceptance runs.
Numerology test_profile();
/// mu=0, 10 MHz (52 PRB), 122.88 MHz sampling (4x oversampled).
Numerology full_profile();

struct PrsConfig {
    int n_id_seq = 0;  // [0, 4095]
    int k_comb = 6;    // {2, 4, 6, 12}
    int k_offset = 0;  // [0, k_comb-1]
    int num_symbols = 12;
    int start_symbol = 0;
    std::set<int> slots_active;  // empty = every slot

    bool slot_active(int slot) const {
        return slots_active.empty() || slots_active.count(slot) > 0;
    }
    void validate(const Numerology& num) const;
};

/// One slot of frequency-domain resource elements.
/// Subcarrier 0 is the lowest active subcarrier; the active band is centered
/// in the FFT with no DC puncture.
struct ResourceGrid {
    int n_subcarriers = 0;
    int n_symbols = 0;
    int slot_index = 0;
    int frame_index = 0;
    cvec cells;  // column-major: cells[sym * n_subcarriers + sc]

    ResourceGrid() = default;
    ResourceGrid(int subcarriers, int symbols)
        : n_subcarriers(subcarriers),
          n_symbols(symbols),
          cells(static_cast<std::size_t>(subcarriers) * symbols, cd{0.0, 0.0}) {}

    cd& at(int sc, int sym) { return cells[static_cast<std::size_t>(sym) * n_subcarriers + sc]; }
    cd at(int sc, int sym) const {
        return cells[static_cast<std::size_t>(sym) * n_subcarriers + sc];
    }
    double energy() const;
};

/// Complex baseband sample stream.
struct IqSignal {
    cvec samples;
    double sample_rate_hz = 0.0;
    double t0_s = 0.0;
};

/// Gold sequence seed for one (sequence id, slot, symbol).
std::uint32_t prs_c_init(int n_id_seq, int slot, int symbol, int symbols_per_slot);

/// Length-31 Gold sequence with the standard generator polynomials and the
/// standard 1600-sample advance.
std::vector<std::uint8_t> gold_sequence(std::uint32_t c_init, std::size_t length);

/// QPSK: symbol m = (1-2b(2m))/sqrt2 + j(1-2b(2m+1))/sqrt2.
cvec qpsk_map(const std::vector<std::uint8_t>& bits);

/// Number of PRS resource elements per occupied OFDM symbol.
int prs_res_per_symbol(const PrsConfig& cfg, const Numerology& num);

/// Source bitstream for one slot: the concatenated per-symbol Gold sequences
/// (2 bits per PRS RE, num_symbols symbols). This is the plaintext that the
/// encrypted-PRS path XORs with the keystream.
std::vector<std::uint8_t> prs_slot_bits(const PrsConfig& cfg, const Numerology& num, int slot);

/// Map a slot bitstream onto the comb. bits.size() must equal
/// 2 * prs_res_per_symbol * num_symbols.
ResourceGrid grid_from_bits(const std::vector<std::uint8_t>& bits, const PrsConfig& cfg,
                            const Numerology& num, int slot, int frame);

/// Standard (unencrypted) PRS grid for one slot.
ResourceGrid generate_prs_grid(const PrsConfig& cfg, const Numerology& num, int slot, int frame);

/// OFDM synthesis with unitary per-symbol transforms: sample energy excluding
/// cyclic prefixes equals grid energy exactly.
IqSignal ofdm_modulate(const ResourceGrid& grid, const Numerology& num);

/// Inverse of ofdm_modulate for one slot starting at sig.samples[offset].
ResourceGrid ofdm_demodulate(const IqSignal& sig, const Numerology& num,
                             std::size_t offset = 0);

}  // namespace veriloc::prs
