#include "veriloc/secure_prs.hpp"

#include "veriloc/kernels.hpp"
#include "veriloc/prs.hpp"

#include <cstring>

namespace veriloc::crypto {
namespace {

constexpr std::uint8_t kSbox[256] = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab,
    0x76, 0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4,
    0x72, 0xc0, 0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71,
    0xd8, 0x31, 0x15, 0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2,
    0xeb, 0x27, 0xb2, 0x75, 0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6,
    0xb3, 0x29, 0xe3, 0x2f, 0x84, 0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb,
    0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf, 0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45,
    0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8, 0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5,
    0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2, 0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44,
    0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73, 0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a,
    0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb, 0xe0, 0x32, 0x3a, 0x0a, 0x49,
    0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79, 0xe7, 0xc8, 0x37, 0x6d,
    0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08, 0xba, 0x78, 0x25,
    0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a, 0x70, 0x3e,
    0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e, 0xe1,
    0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb,
    0x16};

constexpr std::uint8_t kRcon[10] = {0x01, 0x02, 0x04, 0x08, 0x10,
                                    0x20, 0x40, 0x80, 0x1b, 0x36};

inline std::uint32_t sub_word(std::uint32_t w) {
    return (static_cast<std::uint32_t>(kSbox[(w >> 24) & 0xff]) << 24) |
           (static_cast<std::uint32_t>(kSbox[(w >> 16) & 0xff]) << 16) |
           (static_cast<std::uint32_t>(kSbox[(w >> 8) & 0xff]) << 8) |
           kSbox[w & 0xff];
}

inline std::uint32_t rot_word(std::uint32_t w) { return (w << 8) | (w >> 24); }

inline std::uint8_t xtime(std::uint8_t a) {
    return static_cast<std::uint8_t>((a << 1) ^ ((a & 0x80) ? 0x1b : 0x00));
}

}  // namespace

Aes128::Aes128(const std::array<std::uint8_t, 16>& key) {
    for (int i = 0; i < 4; ++i)
        round_keys_[i] = (static_cast<std::uint32_t>(key[4 * i]) << 24) |
                         (static_cast<std::uint32_t>(key[4 * i + 1]) << 16) |
                         (static_cast<std::uint32_t>(key[4 * i + 2]) << 8) | key[4 * i + 3];
    for (int i = 4; i < 44; ++i) {
        std::uint32_t t = round_keys_[i - 1];
        if (i % 4 == 0)
            t = sub_word(rot_word(t)) ^ (static_cast<std::uint32_t>(kRcon[i / 4 - 1]) << 24);
        round_keys_[i] = round_keys_[i - 4] ^ t;
    }
}

void Aes128::encrypt_block(const std::uint8_t in[16], std::uint8_t out[16]) const {
    std::uint8_t s[16];
    std::memcpy(s, in, 16);
    auto add_round_key = [&](int round) {
        for (int c = 0; c < 4; ++c) {
            const std::uint32_t w = round_keys_[4 * round + c];
            s[4 * c] ^= static_cast<std::uint8_t>(w >> 24);
            s[4 * c + 1] ^= static_cast<std::uint8_t>(w >> 16);
            s[4 * c + 2] ^= static_cast<std::uint8_t>(w >> 8);
            s[4 * c + 3] ^= static_cast<std::uint8_t>(w);
        }
    };
    auto sub_bytes = [&] {
        for (auto& b : s) b = kSbox[b];
    };
    auto shift_rows = [&] {
        std::uint8_t t[16];
        std::memcpy(t, s, 16);
        for (int r = 1; r < 4; ++r)
            for (int c = 0; c < 4; ++c) s[4 * c + r] = t[4 * ((c + r) % 4) + r];
    };
    auto mix_columns = [&] {
        for (int c = 0; c < 4; ++c) {
            std::uint8_t* col = s + 4 * c;
            const std::uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
            const std::uint8_t x = static_cast<std::uint8_t>(a0 ^ a1 ^ a2 ^ a3);
            col[0] = static_cast<std::uint8_t>(a0 ^ x ^ xtime(static_cast<std::uint8_t>(a0 ^ a1)));
            col[1] = static_cast<std::uint8_t>(a1 ^ x ^ xtime(static_cast<std::uint8_t>(a1 ^ a2)));
            col[2] = static_cast<std::uint8_t>(a2 ^ x ^ xtime(static_cast<std::uint8_t>(a2 ^ a3)));
            col[3] = static_cast<std::uint8_t>(a3 ^ x ^ xtime(static_cast<std::uint8_t>(a3 ^ a0)));
        }
    };
    add_round_key(0);
    for (int round = 1; round < 10; ++round) {
        sub_bytes();
        shift_rows();
        mix_columns();
        add_round_key(round);
    }
    sub_bytes();
    shift_rows();
    add_round_key(10);
    std::memcpy(out, s, 16);
}

std::array<std::uint8_t, 12> make_nonce(std::uint32_t bs_id, std::uint32_t frame,
                                        std::uint16_t slot) {
    std::array<std::uint8_t, 12> n{};
    for (int i = 0; i < 4; ++i) n[i] = static_cast<std::uint8_t>(bs_id >> (24 - 8 * i));
    for (int i = 0; i < 4; ++i) n[4 + i] = static_cast<std::uint8_t>(frame >> (24 - 8 * i));
    n[8] = static_cast<std::uint8_t>(slot >> 8);
    n[9] = static_cast<std::uint8_t>(slot);
    return n;
}

std::array<std::uint8_t, 16> key_from_hex(const std::string& hex) {
    if (hex.size() != 32) throw ParamError("key_from_hex: expected 32 hex chars");
    std::array<std::uint8_t, 16> key{};
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw ParamError("key_from_hex: invalid hex character");
    };
    for (int i = 0; i < 16; ++i)
        key[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return key;
}

std::vector<std::uint8_t> keystream(const KeyMaterial& km, std::size_t nbits) {
    if (nbits < 1) throw ParamError("keystream: nbits must be >= 1");
    const std::size_t nblocks = (nbits + 127) / 128;
    if (nblocks > (1ULL << 32))
        throw ParamError("keystream: counter space exhausted");
    const Aes128 cipher(km.key);
    std::vector<std::uint8_t> bits(nbits);
    std::uint8_t block_in[16], block_out[16];
    std::memcpy(block_in, km.nonce.data(), 12);
    std::size_t pos = 0;
    for (std::size_t blk = 0; blk < nblocks; ++blk) {
        const std::uint64_t ctr = km.counter_base + blk;  // wraps mod 2^32 by construction
        for (int i = 0; i < 4; ++i)
            block_in[12 + i] = static_cast<std::uint8_t>(ctr >> (24 - 8 * i));
        cipher.encrypt_block(block_in, block_out);
        for (int byte = 0; byte < 16 && pos < nbits; ++byte)
            for (int bit = 7; bit >= 0 && pos < nbits; --bit)
                bits[pos++] = (block_out[byte] >> bit) & 1u;
    }
    return bits;
}

EncryptedPrsSequence encrypt_with_keystream(const std::vector<std::uint8_t>& bits,
                                            const std::vector<std::uint8_t>& ks) {
    if (bits.size() % 2 != 0) throw ParamError("encrypt_prs: odd bit count");
    if (ks.size() < bits.size()) throw ParamError("encrypt_prs: keystream too short");
    EncryptedPrsSequence out;
    out.source_bits.resize(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        out.source_bits[i] = bits[i] ^ ks[i];
    out.symbols = prs::qpsk_map(out.source_bits);
    return out;
}

EncryptedPrsSequence encrypt_prs(const std::vector<std::uint8_t>& bits, const KeyMaterial& km) {
    return encrypt_with_keystream(bits, keystream(km, bits.size()));
}

cd correlate(const cvec& a, const cvec& b) {
    if (a.size() != b.size()) throw ParamError("correlate: length mismatch");
    return kern::cdot_conj(a.data(), b.data(), a.size());
}

CrosscorrStats crosscorr_variance_estimate(const std::vector<std::uint8_t>& plain_bits,
                                           std::size_t trials, std::uint64_t seed) {
    if (trials < 100) throw ParamError("crosscorr_variance_estimate: need >= 100 trials");
    const cvec s_plain = prs::qpsk_map(plain_bits);
    Rng rng(seed);
    std::uniform_int_distribution<int> byte_dist(0, 255);
    cd sum{0.0, 0.0};
    double sum_sq = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        KeyMaterial km;
        for (auto& b : km.key) b = static_cast<std::uint8_t>(byte_dist(rng));
        for (auto& b : km.nonce) b = static_cast<std::uint8_t>(byte_dist(rng));
        const auto enc = encrypt_prs(plain_bits, km);
        const cd r = correlate(s_plain, enc.symbols);
        sum += r;
        sum_sq += std::norm(r);
    }
    CrosscorrStats st;
    st.trials = trials;
    st.mean = sum / static_cast<double>(trials);
    st.variance = sum_sq / static_cast<double>(trials) - std::norm(st.mean);
    return st;
}

}  // namespace veriloc::crypto
