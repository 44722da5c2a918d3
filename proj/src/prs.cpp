#include "veriloc/prs.hpp"

#include "veriloc/fft.hpp"
#include "veriloc/kernels.hpp"

#include <cmath>
#include <numeric>

namespace veriloc::prs {

int Numerology::slot_samples() const {
    int total = 0;
    for (int l = 0; l < symbols_per_slot; ++l) total += n_fft + cp_lengths[l];
    return total;
}

void Numerology::validate() const {
    if (symbols_per_slot != 14) throw ParamError("numerology: normal CP requires 14 symbols/slot");
    if (static_cast<int>(cp_lengths.size()) != symbols_per_slot)
        throw ParamError("numerology: cp_lengths size mismatch");
    if (std::abs(sample_rate_hz - n_fft * scs_hz) > 1e-6)
        throw ParamError("numerology: sample_rate != n_fft * scs");
    if (active_subcarriers() > n_fft)
        throw ParamError("numerology: active subcarriers exceed FFT size");
}

namespace {

Numerology make_profile(int n_fft) {
    Numerology num;
    num.mu = 0;
    num.scs_hz = 15e3;
    num.n_fft = n_fft;
    num.sample_rate_hz = n_fft * 15e3;
    num.n_prb = 52;
    const int scale = n_fft / 2048;  // CP reference values are for 30.72 MHz
    num.cp_lengths.resize(14);
    for (int l = 0; l < 14; ++l) num.cp_lengths[l] = ((l % 7 == 0) ? 160 : 144) * scale;
    num.validate();
    return num;
}

}  // namespace

Numerology test_profile() { return make_profile(2048); }
Numerology full_profile() { return make_profile(8192); }

void PrsConfig::validate(const Numerology& num) const {
    if (n_id_seq < 0 || n_id_seq > 4095) throw ParamError("prs: n_id_seq out of range");
    if (k_comb != 2 && k_comb != 4 && k_comb != 6 && k_comb != 12)
        throw ParamError("prs: invalid comb size");
    if (k_offset < 0 || k_offset >= k_comb) throw ParamError("prs: k_offset out of range");
    if (num_symbols < 1 || start_symbol < 0 ||
        start_symbol + num_symbols > num.symbols_per_slot)
        throw ParamError("prs: symbol allocation exceeds slot");
    if (num.active_subcarriers() % k_comb != 0)
        throw ParamError("prs: active subcarriers not divisible by comb size");
}

double ResourceGrid::energy() const { return kern::energy(cells.data(), cells.size()); }

std::uint32_t prs_c_init(int n_id_seq, int slot, int symbol, int symbols_per_slot) {
    if (n_id_seq < 0 || n_id_seq > 4095) throw ParamError("c_init: n_id_seq out of range");
    if (slot < 0 || symbol < 0 || symbol >= symbols_per_slot)
        throw ParamError("c_init: slot/symbol out of range");
    const std::uint64_t nid = static_cast<std::uint64_t>(n_id_seq);
    const std::uint64_t hi = nid / 1024;
    const std::uint64_t lo = nid % 1024;
    const std::uint64_t v =
        (1ULL << 22) * hi +
        (1ULL << 10) * (static_cast<std::uint64_t>(symbols_per_slot) * slot + symbol + 1) *
            (2 * lo + 1) +
        lo;
    return static_cast<std::uint32_t>(v % (1ULL << 31));
}

std::vector<std::uint8_t> gold_sequence(std::uint32_t c_init, std::size_t length) {
    if (length < 1) throw ParamError("gold: length must be >= 1");
    constexpr int kAdvance = 1600;  // N_C
    // bit i of each register holds x(n+i)
    std::uint32_t x1 = 1;
    std::uint32_t x2 = c_init & 0x7fffffff;
    auto step1 = [&] {
        const std::uint32_t b = ((x1 >> 3) ^ x1) & 1u;
        x1 = (x1 >> 1) | (b << 30);
    };
    auto step2 = [&] {
        const std::uint32_t b = ((x2 >> 3) ^ (x2 >> 2) ^ (x2 >> 1) ^ x2) & 1u;
        x2 = (x2 >> 1) | (b << 30);
    };
    for (int i = 0; i < kAdvance; ++i) {
        step1();
        step2();
    }
    std::vector<std::uint8_t> out(length);
    for (std::size_t i = 0; i < length; ++i) {
        out[i] = static_cast<std::uint8_t>((x1 ^ x2) & 1u);
        step1();
        step2();
    }
    return out;
}

cvec qpsk_map(const std::vector<std::uint8_t>& bits) {
    if (bits.size() % 2 != 0) throw ParamError("qpsk: odd bit count");
    const double a = 1.0 / std::sqrt(2.0);
    cvec out(bits.size() / 2);
    for (std::size_t m = 0; m < out.size(); ++m)
        out[m] = cd{(1.0 - 2.0 * bits[2 * m]) * a, (1.0 - 2.0 * bits[2 * m + 1]) * a};
    return out;
}

int prs_res_per_symbol(const PrsConfig& cfg, const Numerology& num) {
    return num.active_subcarriers() / cfg.k_comb;
}

std::vector<std::uint8_t> prs_slot_bits(const PrsConfig& cfg, const Numerology& num, int slot) {
    cfg.validate(num);
    const std::size_t bits_per_symbol = 2u * prs_res_per_symbol(cfg, num);
    std::vector<std::uint8_t> bits;
    bits.reserve(bits_per_symbol * cfg.num_symbols);
    for (int l = cfg.start_symbol; l < cfg.start_symbol + cfg.num_symbols; ++l) {
        const std::uint32_t seed = prs_c_init(cfg.n_id_seq, slot, l, num.symbols_per_slot);
        auto sym_bits = gold_sequence(seed, bits_per_symbol);
        bits.insert(bits.end(), sym_bits.begin(), sym_bits.end());
    }
    return bits;
}

ResourceGrid grid_from_bits(const std::vector<std::uint8_t>& bits, const PrsConfig& cfg,
                            const Numerology& num, int slot, int frame) {
    cfg.validate(num);
    const int res_per_sym = prs_res_per_symbol(cfg, num);
    if (bits.size() != static_cast<std::size_t>(2 * res_per_sym * cfg.num_symbols))
        throw ParamError("grid_from_bits: bit count mismatch");
    ResourceGrid grid(num.active_subcarriers(), num.symbols_per_slot);
    grid.slot_index = slot;
    grid.frame_index = frame;
    if (!cfg.slot_active(slot)) return grid;
    std::size_t pos = 0;
    for (int l = cfg.start_symbol; l < cfg.start_symbol + cfg.num_symbols; ++l) {
        std::vector<std::uint8_t> sym_bits(bits.begin() + pos, bits.begin() + pos + 2 * res_per_sym);
        pos += 2 * res_per_sym;
        const cvec syms = qpsk_map(sym_bits);
        for (int m = 0; m < res_per_sym; ++m) grid.at(cfg.k_offset + m * cfg.k_comb, l) = syms[m];
    }
    return grid;
}

ResourceGrid generate_prs_grid(const PrsConfig& cfg, const Numerology& num, int slot, int frame) {
    return grid_from_bits(prs_slot_bits(cfg, num, slot), cfg, num, slot, frame);
}

IqSignal ofdm_modulate(const ResourceGrid& grid, const Numerology& num) {
    num.validate();
    if (grid.n_subcarriers != num.active_subcarriers() || grid.n_symbols != num.symbols_per_slot)
        throw ParamError("ofdm_modulate: grid dimensions do not match numerology");
    const int n_fft = num.n_fft;
    const int n_act = num.active_subcarriers();
    const double scale = std::sqrt(static_cast<double>(n_fft));
    IqSignal sig;
    sig.sample_rate_hz = num.sample_rate_hz;
    sig.samples.reserve(num.slot_samples());
    cvec freq(n_fft);
    for (int l = 0; l < num.symbols_per_slot; ++l) {
        std::fill(freq.begin(), freq.end(), cd{0.0, 0.0});
        for (int k = 0; k < n_act; ++k) {
            const int bin = (k - n_act / 2 + n_fft) % n_fft;
            freq[bin] = grid.at(k, l);
        }
        cvec time = fft::inverse(freq);
        for (auto& v : time) v *= scale;  // unitary IDFT
        const int cp = num.cp_lengths[l];
        sig.samples.insert(sig.samples.end(), time.end() - cp, time.end());
        sig.samples.insert(sig.samples.end(), time.begin(), time.end());
    }
    return sig;
}

ResourceGrid ofdm_demodulate(const IqSignal& sig, const Numerology& num, std::size_t offset) {
    num.validate();
    if (sig.samples.size() < offset + static_cast<std::size_t>(num.slot_samples()))
        throw ParamError("ofdm_demodulate: insufficient samples for one slot");
    const int n_fft = num.n_fft;
    const int n_act = num.active_subcarriers();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_fft));
    ResourceGrid grid(n_act, num.symbols_per_slot);
    std::size_t pos = offset;
    for (int l = 0; l < num.symbols_per_slot; ++l) {
        pos += num.cp_lengths[l];
        cvec time(sig.samples.begin() + pos, sig.samples.begin() + pos + n_fft);
        pos += n_fft;
        cvec freq = fft::forward(std::move(time));
        for (int k = 0; k < n_act; ++k) {
            const int bin = (k - n_act / 2 + n_fft) % n_fft;
            grid.at(k, l) = freq[bin] * scale;
        }
    }
    return grid;
}

}  // namespace veriloc::prs
