#pragma once

#include "veriloc/common.hpp"
#include "veriloc/prs.hpp"
#include "veriloc/verdict.hpp"

#include <array>
#include <utility>

namespace veriloc::auth {

std::array<std::uint8_t, 32> sha256(const std::vector<std::uint8_t>& msg);
std::array<std::uint8_t, 32> hmac_sha256(const std::vector<std::uint8_t>& key,
                                         const std::vector<std::uint8_t>& msg);

enum class AuthKind { Hmac, DigitalSignature };

/// Tag scheme for one base station. HMAC-SHA-256 truncated to tag_bits, or an
/// Ed25519 signature (tag_bits = 512).
struct AuthScheme {
    AuthKind kind = AuthKind::Hmac;
    int tag_bits = 128;
    std::vector<std::uint8_t> hmac_key;
    std::vector<std::uint8_t> signing_key;  // Ed25519 secret key (64 bytes)
    std::vector<std::uint8_t> verify_key;   // Ed25519 public key (32 bytes)

    static AuthScheme hmac(std::vector<std::uint8_t> key, int tag_bits = 128);
    /// Deterministic Ed25519 keypair derived from a 32-byte seed.
    static AuthScheme signature_from_seed(const std::array<std::uint8_t, 32>& seed);
};

/// Canonical signed message: bs_id, frame, slot, n_id_seq as fixed-width
/// big-endian u32 fields in that order.
std::vector<std::uint8_t> build_auth_message(std::uint32_t bs_id, std::uint32_t frame,
                                             std::uint32_t slot, std::uint32_t n_id_seq);

std::vector<std::uint8_t> compute_tag(const AuthScheme& scheme,
                                      const std::vector<std::uint8_t>& msg);
bool verify_tag(const AuthScheme& scheme, const std::vector<std::uint8_t>& msg,
                const std::vector<std::uint8_t>& tag);

std::vector<std::uint8_t> bytes_to_bits(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> bits_to_bytes(const std::vector<std::uint8_t>& bits);

/// Rate-1/2 (3,6)-regular Gallager code, seed-reproducible, greedy 4-cycle
/// avoidance. Sum-product decoding, at most 25 iterations.
class LdpcCode {
  public:
    LdpcCode(int info_bits, std::uint64_t seed);

    int n() const { return n_; }
    int k() const { return k_; }
    int max_iterations() const { return 25; }

    std::vector<std::uint8_t> encode(const std::vector<std::uint8_t>& info) const;
    /// LLR convention: positive favours bit 0. Returns the hard-decision
    /// codeword and whether all parity checks were satisfied.
    std::pair<std::vector<std::uint8_t>, bool> decode(const std::vector<double>& llrs) const;

    std::vector<std::uint8_t> extract_info(const std::vector<std::uint8_t>& codeword) const;
    bool parity_ok(const std::vector<std::uint8_t>& codeword) const;
    const std::vector<std::vector<int>>& check_adjacency() const { return check_cols_; }

  private:
    int n_;
    int k_;
    std::vector<std::vector<int>> check_cols_;  // per check row, variable indices
    std::vector<std::vector<int>> var_rows_;    // per variable, check indices
    // systematic encoder state (row-reduced parity check)
    std::vector<int> pivot_cols_;
    std::vector<int> info_cols_;
    std::vector<std::vector<std::uint64_t>> rref_;  // m rows of n-bit masks

    void build_graph(std::uint64_t seed);
    bool build_encoder();  // false if the parity matrix is rank deficient
};

/// Resource elements carrying one BS's tag within a slot.
struct EmbeddingMap {
    std::vector<std::pair<int, int>> re_indices;  // (subcarrier, symbol)
    int k_offset_sig = 0;
};

/// Tag cells on comb residue k_offset_sig, symbol-major order, exactly
/// coded_bits/2 cells. Throws if the comb cannot carry the payload.
EmbeddingMap make_embedding_map(int k_offset_sig, int k_comb, const prs::Numerology& num,
                                int start_symbol, int num_symbols, int coded_bits);

prs::ResourceGrid embed_tag(const prs::ResourceGrid& grid, const EmbeddingMap& map,
                            const std::vector<std::uint8_t>& coded_bits);

std::vector<double> extract_llrs(const prs::ResourceGrid& grid, const EmbeddingMap& map,
                                 double noise_var);

DetectionVerdict extract_and_verify(const prs::ResourceGrid& grid, const EmbeddingMap& map,
                                    const AuthScheme& scheme, const LdpcCode& code,
                                    const std::vector<std::uint8_t>& expected_msg,
                                    double noise_var);

}  // namespace veriloc::auth
