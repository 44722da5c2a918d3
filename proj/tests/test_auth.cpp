#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "veriloc/auth.hpp"

#include <random>

using namespace veriloc;

namespace {

std::vector<std::uint8_t> from_hex(const std::string& hex) {
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(std::stoi(hex.substr(2 * i, 2), nullptr, 16));
    return out;
}

std::string to_hex(const std::vector<std::uint8_t>& bytes) {
    std::string s;
    for (auto b : bytes) {
        static const char* digits = "0123456789abcdef";
        s += digits[b >> 4];
        s += digits[b & 0xf];
    }
    return s;
}

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N>& bytes) {
    return to_hex(std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
}

}  // namespace

TEST_CASE("sha256 standard vectors") {
    CHECK(to_hex(auth::sha256({})) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const std::string abc = "abc";
    CHECK(to_hex(auth::sha256({abc.begin(), abc.end()})) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const std::string two = "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq";
    CHECK(to_hex(auth::sha256({two.begin(), two.end()})) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("hmac-sha256 standard vectors") {
    const std::string m1 = "Hi There";
    CHECK(to_hex(auth::hmac_sha256(std::vector<std::uint8_t>(20, 0x0b), {m1.begin(), m1.end()})) ==
          "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7");
    const std::string k2 = "Jefe";
    const std::string m2 = "what do ya want for nothing?";
    CHECK(to_hex(auth::hmac_sha256({k2.begin(), k2.end()}, {m2.begin(), m2.end()})) ==
          "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

TEST_CASE("signature scheme matches the reference ed25519 vector") {
    std::array<std::uint8_t, 32> seed{};
    const auto seed_bytes =
        from_hex("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60");
    std::copy(seed_bytes.begin(), seed_bytes.end(), seed.begin());
    const auto scheme = auth::AuthScheme::signature_from_seed(seed);
    CHECK(scheme.kind == auth::AuthKind::DigitalSignature);
    CHECK(scheme.tag_bits == 512);
    CHECK(to_hex(scheme.verify_key) ==
          "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
    const auto sig = auth::compute_tag(scheme, {});
    CHECK(to_hex(sig) ==
          "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc6"
          "1e39701cf9b46bd25bf5f0595bbe24655141438e7a100b");
    CHECK(auth::verify_tag(scheme, {}, sig));
    auto bad = sig;
    bad[0] ^= 1;
    CHECK_FALSE(auth::verify_tag(scheme, {}, bad));
}

TEST_CASE("hmac tags truncate and verify") {
    const auto scheme = auth::AuthScheme::hmac(std::vector<std::uint8_t>(16, 0x42));
    const auto msg = auth::build_auth_message(1, 2, 3, 4);
    const auto tag = auth::compute_tag(scheme, msg);
    CHECK(tag.size() == 16);  // 128 bits
    CHECK(auth::verify_tag(scheme, msg, tag));
    CHECK_FALSE(auth::verify_tag(scheme, auth::build_auth_message(1, 2, 3, 5), tag));
}

TEST_CASE("auth message layout is fixed-width big-endian") {
    const auto msg = auth::build_auth_message(0x01020304u, 0x05060708u, 0x090a0b0cu, 0x0d0e0f10u);
    CHECK(msg == from_hex("0102030405060708090a0b0c0d0e0f10"));
}

TEST_CASE("bit packing round trip") {
    const std::vector<std::uint8_t> bytes = {0xa5, 0x01};
    const auto bits = auth::bytes_to_bits(bytes);
    const std::vector<std::uint8_t> expect = {1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 1};
    CHECK(bits == expect);
    CHECK(auth::bits_to_bytes(bits) == bytes);
}

TEST_CASE("ldpc code structure is (3,6)-regular and systematic") {
    const auth::LdpcCode code(128, 7);
    CHECK(code.k() == 128);
    CHECK(code.n() == 256);
    CHECK(code.max_iterations() == 25);
    std::vector<int> var_degree(code.n(), 0);
    for (const auto& row : code.check_adjacency()) {
        CHECK(row.size() == 6);
        for (int c : row) ++var_degree[c];
    }
    for (int d : var_degree) CHECK(d == 3);
}

TEST_CASE("ldpc noiseless round trip") {
    const auth::LdpcCode code(128, 7);
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::uint8_t> info(code.k());
        for (auto& b : info) b = static_cast<std::uint8_t>(rng() & 1u);
        const auto cw = code.encode(info);
        CHECK(code.parity_ok(cw));
        CHECK(code.extract_info(cw) == info);

        // positive LLR favours bit 0
        std::vector<double> llrs(code.n());
        for (int i = 0; i < code.n(); ++i) llrs[i] = cw[i] ? -4.0 : 4.0;
        const auto [decoded, converged] = code.decode(llrs);
        CHECK(converged);
        CHECK(decoded == cw);
    }
}

TEST_CASE("ldpc corrects a few noisy positions") {
    const auth::LdpcCode code(128, 7);
    std::vector<std::uint8_t> info(code.k(), 0);
    info[3] = info[77] = 1;
    const auto cw = code.encode(info);
    std::vector<double> llrs(code.n());
    for (int i = 0; i < code.n(); ++i) llrs[i] = cw[i] ? -4.0 : 4.0;
    // flip the sign of a handful of positions
    for (int i : {5, 60, 130, 200}) llrs[i] = -llrs[i] * 0.5;
    const auto [decoded, converged] = code.decode(llrs);
    CHECK(converged);
    CHECK(decoded == cw);
}

TEST_CASE("ldpc reports failure on an uninformative channel") {
    const auth::LdpcCode code(128, 7);
    const auto [decoded, converged] = code.decode(std::vector<double>(code.n(), 0.0));
    CHECK_FALSE(converged);
    (void)decoded;
}

TEST_CASE("ldpc seeds reproduce and differ") {
    const auth::LdpcCode a(128, 7), b(128, 7), c(128, 8);
    CHECK(a.check_adjacency() == b.check_adjacency());
    CHECK(a.check_adjacency() != c.check_adjacency());
}

TEST_CASE("embedding map capacity and layout") {
    const auto num = prs::test_profile();
    const auto map = auth::make_embedding_map(1, 6, num, 0, 12, 256);
    CHECK(map.re_indices.size() == 128);
    for (const auto& [sc, sym] : map.re_indices) {
        CHECK(sc % 6 == 1);
        CHECK(sym >= 0);
        CHECK(sym < 12);
    }
    // payload larger than the comb residue can carry
    CHECK_THROWS_AS(auth::make_embedding_map(1, 6, num, 0, 1, 2000), ParamError);
}

TEST_CASE("embedded tag extracts and verifies") {
    const auto num = prs::test_profile();
    const auto scheme = auth::AuthScheme::hmac(std::vector<std::uint8_t>(16, 0x11));
    const auth::LdpcCode code(scheme.tag_bits, 7);
    const auto msg = auth::build_auth_message(12, 34, 0, 56);
    const auto coded = code.encode(auth::bytes_to_bits(auth::compute_tag(scheme, msg)));

    const auto map = auth::make_embedding_map(1, 6, num, 0, 12, static_cast<int>(coded.size()));
    prs::ResourceGrid grid(num.active_subcarriers(), num.symbols_per_slot);
    const auto tagged = auth::embed_tag(grid, map, coded);

    const auto good = auth::extract_and_verify(tagged, map, scheme, code, msg, 0.1);
    CHECK(good.valid);

    const auto wrong_msg = auth::extract_and_verify(tagged, map, scheme, code,
                                                    auth::build_auth_message(12, 34, 0, 57), 0.1);
    CHECK_FALSE(wrong_msg.valid);

    // an empty grid (no tag present) must not verify
    const auto absent = auth::extract_and_verify(grid, map, scheme, code, msg, 0.1);
    CHECK_FALSE(absent.valid);
}
