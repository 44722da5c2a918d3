#pragma once

#include "veriloc/common.hpp"

#include <array>

namespace veriloc::crypto {

/// AES-128 block cipher (FIPS-197), encryption direction only.
class Aes128 {
  public:
    explicit Aes128(const std::array<std::uint8_t, 16>& key);
    void encrypt_block(const std::uint8_t in[16], std::uint8_t out[16]) const;

  private:
    std::array<std::uint32_t, 44> round_keys_{};
};

/// Key, nonce and counter base for one encrypted PRS stream. A (nonce,
/// counter range) pair must never repeat under the same key.
struct KeyMaterial {
    std::array<std::uint8_t, 16> key{};
    std::array<std::uint8_t, 12> nonce{};
    std::uint32_t counter_base = 0;
};

/// nonce = bs_id (32) || frame (32) || slot (16) || zero (16), big-endian.
/// Binds the keystream to the transmission slot so replays across slots
/// decorrelate.
std::array<std::uint8_t, 12> make_nonce(std::uint32_t bs_id, std::uint32_t frame,
                                        std::uint16_t slot);

std::array<std::uint8_t, 16> key_from_hex(const std::string& hex);

/// First nbits of AES-CTR(nonce || counter_base + i) under km.key, MSB-first
/// within each byte.
std::vector<std::uint8_t> keystream(const KeyMaterial& km, std::size_t nbits);

struct EncryptedPrsSequence {
    cvec symbols;
    std::vector<std::uint8_t> source_bits;
    int bs_id = 0;
};

/// XOR bits with an explicit keystream, then QPSK-map. Exposed separately so
/// the XOR-identity and involution properties are testable without a cipher.
EncryptedPrsSequence encrypt_with_keystream(const std::vector<std::uint8_t>& bits,
                                            const std::vector<std::uint8_t>& ks);

EncryptedPrsSequence encrypt_prs(const std::vector<std::uint8_t>& bits, const KeyMaterial& km);

/// Inner product with conjugated first argument.
cd correlate(const cvec& a, const cvec& b);

struct CrosscorrStats {
    cd mean;
    double variance = 0.0;
    std::size_t trials = 0;
};

/// Monte-Carlo statistics of R = <s_plain, s_enc> over freshly keyed
/// encryptions of the same source bits. Var(R) should track N * sigma_s^4.
CrosscorrStats crosscorr_variance_estimate(const std::vector<std::uint8_t>& plain_bits,
                                           std::size_t trials, std::uint64_t seed);

}  // namespace veriloc::crypto
