#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "veriloc/prs.hpp"
#include "veriloc/secure_prs.hpp"

#include <random>

using namespace veriloc;

TEST_CASE("nonce layout is big-endian bs || frame || slot || zero") {
    const auto n = crypto::make_nonce(0x01020304u, 0x0a0b0c0du, 0x1122u);
    const std::array<std::uint8_t, 12> expect = {0x01, 0x02, 0x03, 0x04, 0x0a, 0x0b,
                                                 0x0c, 0x0d, 0x11, 0x22, 0x00, 0x00};
    CHECK(n == expect);
}

TEST_CASE("key_from_hex") {
    const auto key = crypto::key_from_hex("000102030405060708090a0b0c0d0e0F");
    CHECK(key[0] == 0x00);
    CHECK(key[15] == 0x0f);
    CHECK_THROWS_AS(crypto::key_from_hex("00"), ParamError);
    CHECK_THROWS_AS(crypto::key_from_hex("zz0102030405060708090a0b0c0d0e0f"), ParamError);
}

TEST_CASE("keystream matches an independent AES-CTR computation") {
    // AES-128-ECB of the counter block 00000007|0000007b|0005|0000|00000000
    // under key 000102...0f gives 29 b9 81 18 ... (computed with an
    // independent implementation).
    crypto::KeyMaterial km;
    km.key = crypto::key_from_hex("000102030405060708090a0b0c0d0e0f");
    km.nonce = crypto::make_nonce(7, 123, 5);
    const auto bits = crypto::keystream(km, 32);
    const std::vector<std::uint8_t> first16 = {0, 0, 1, 0, 1, 0, 0, 1,
                                               1, 0, 1, 1, 1, 0, 0, 1};  // 0x29 0xb9
    CHECK(std::vector<std::uint8_t>(bits.begin(), bits.begin() + 16) == first16);
    // 0x81 0x18
    const std::vector<std::uint8_t> next16 = {1, 0, 0, 0, 0, 0, 0, 1,
                                              0, 0, 0, 1, 1, 0, 0, 0};
    CHECK(std::vector<std::uint8_t>(bits.begin() + 16, bits.end()) == next16);
}

TEST_CASE("keystream blocks chain through the counter") {
    crypto::KeyMaterial km;
    km.key = crypto::key_from_hex("000102030405060708090a0b0c0d0e0f");
    km.nonce = crypto::make_nonce(1, 2, 3);
    const auto longks = crypto::keystream(km, 256);
    km.counter_base = 1;
    const auto second = crypto::keystream(km, 128);
    CHECK(std::vector<std::uint8_t>(longks.begin() + 128, longks.end()) == second);
}

TEST_CASE("encryption is an involution on the bitstream") {
    const auto num = prs::test_profile();
    prs::PrsConfig cfg;
    cfg.n_id_seq = 55;
    const auto bits = prs::prs_slot_bits(cfg, num, 0);
    crypto::KeyMaterial km;
    km.key = crypto::key_from_hex("5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a");
    km.nonce = crypto::make_nonce(3, 4, 5);
    const auto enc = crypto::encrypt_prs(bits, km);
    CHECK(enc.source_bits != bits);
    const auto dec = crypto::encrypt_prs(enc.source_bits, km);
    CHECK(dec.source_bits == bits);
}

TEST_CASE("different slots decorrelate the keystream") {
    crypto::KeyMaterial a, b;
    a.key = b.key = crypto::key_from_hex("000102030405060708090a0b0c0d0e0f");
    a.nonce = crypto::make_nonce(9, 0, 0);
    b.nonce = crypto::make_nonce(9, 0, 1);
    CHECK(crypto::keystream(a, 128) != crypto::keystream(b, 128));
}

TEST_CASE("autocorrelation peak power is exactly N^2") {
    for (std::size_t n : {512u, 1024u}) {
        std::vector<std::uint8_t> bits(2 * n);
        Rng rng(n);
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
        const cvec s = prs::qpsk_map(bits);
        const cd r = crypto::correlate(s, s);
        CHECK(r.real() == doctest::Approx(double(n)).epsilon(1e-12));
        CHECK(r.imag() == doctest::Approx(0.0));
        CHECK(std::norm(r) == doctest::Approx(double(n) * double(n)).epsilon(1e-12));
    }
}

TEST_CASE("plain-vs-encrypted cross-correlation variance scales with N") {
    const std::size_t n = 1024;
    std::vector<std::uint8_t> bits(2 * n);
    Rng rng(77);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
    const auto st = crypto::crosscorr_variance_estimate(bits, 800, 42);
    CHECK(st.trials == 800);
    CHECK(std::abs(st.mean) < 3.0 * std::sqrt(double(n) / 800.0) + 2.0);
    CHECK(st.variance > 0.8 * double(n));
    CHECK(st.variance < 1.2 * double(n));
}
