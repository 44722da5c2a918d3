#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "veriloc/detect.hpp"

#include <random>

using namespace veriloc;

TEST_CASE("esprit recovers a clean single-source angle") {
    detect::UlaConfig ula;
    for (double truth : {-60.0, -17.5, 0.0, 8.0, 45.0}) {
        const auto X = detect::ula_snapshots({{truth, 1.0}}, ula, 0.0, 1);
        const auto angles = detect::esprit_azimuth(X, 1);
        REQUIRE(angles.size() == 1);
        CHECK(angles[0] == doctest::Approx(truth).epsilon(1e-6));
    }
}

TEST_CASE("esprit stays within a degree at 20 dB snr") {
    detect::UlaConfig ula;
    const double truth = 25.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto X = detect::ula_snapshots({{truth, std::pow(10.0, 1.0)}}, ula, 1.0, seed);
        const auto angles = detect::esprit_azimuth(X, 1);
        REQUIRE(angles.size() == 1);
        CHECK(std::abs(angles[0] - truth) < 1.0);
    }
}

TEST_CASE("esprit separates two sources") {
    detect::UlaConfig ula;
    ula.snapshots = 200;
    const auto X = detect::ula_snapshots({{-30.0, 1.0}, {20.0, 1.0}}, ula, 0.01, 3);
    const auto angles = detect::esprit_azimuth(X, 2);
    REQUIRE(angles.size() == 2);
    CHECK(angles[0] == doctest::Approx(-30.0).epsilon(0.05));
    CHECK(angles[1] == doctest::Approx(20.0).epsilon(0.05));
}

TEST_CASE("angle gate is inclusive at the boundary") {
    detect::AngleGate gate;
    gate.theta_ref_deg = 10.0;
    gate.delta_th_deg = 20.0;
    CHECK(detect::absa_check(30.0, gate).valid);
    CHECK_FALSE(detect::absa_check(30.01, gate).valid);
    CHECK(detect::absa_check(-10.0, gate).valid);
    const auto missing = detect::absa_check(std::nullopt, gate);
    CHECK_FALSE(missing.valid);
    CHECK(missing.reason == "aoa estimation failure");
}

TEST_CASE("reference angle uses the signed broadside convention") {
    // array along +y: a BS due broadside (+x) is at 0 degrees
    CHECK(detect::reference_angle({0.0, 0.0}, {100.0, 0.0}) == doctest::Approx(0.0));
    CHECK(detect::reference_angle({0.0, 0.0}, {0.0, 100.0}) == doctest::Approx(90.0));
    CHECK(detect::reference_angle({0.0, 0.0}, {100.0, -100.0}) == doctest::Approx(-45.0));
    // front-back ambiguity folds through the sine
    CHECK(detect::reference_angle({0.0, 0.0}, {-100.0, 100.0}) == doctest::Approx(45.0));
    CHECK_THROWS_AS(detect::reference_angle({1.0, 1.0}, {1.0, 1.0}), ParamError);
}

TEST_CASE("handshake gate on the position discrepancy") {
    detect::HandshakeGate gate;  // epsilon 20 m
    CHECK(detect::handshake_check(Point2{0.0, 0.0}, {10.0, 0.0}, gate).valid);
    CHECK(detect::handshake_check(Point2{0.0, 0.0}, {20.0, 0.0}, gate).valid);
    const auto far = detect::handshake_check(Point2{0.0, 0.0}, {25.0, 0.0}, gate);
    CHECK_FALSE(far.valid);
    CHECK(far.diagnostic == doctest::Approx(25.0));
    const auto dos = detect::handshake_check(std::nullopt, {0.0, 0.0}, gate);
    CHECK_FALSE(dos.valid);
    CHECK(dos.reason == "no downlink position");
}

TEST_CASE("ul position model is an unbiased gaussian around truth") {
    detect::HandshakeGate gate;
    gate.ul_sigma_m = 3.0;
    double sx = 0.0, sxx = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        const auto p = detect::ul_position_model({100.0, 50.0}, gate, i);
        sx += p.x - 100.0;
        sxx += (p.x - 100.0) * (p.x - 100.0);
    }
    CHECK(sx / n == doctest::Approx(0.0).epsilon(0.2));
    CHECK(std::sqrt(sxx / n) == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("nis is chi-square(2) calibrated in steady state") {
    // truth follows the filter's motion model: white acceleration of unit
    // sigma, measurement noise matched to R
    const double sigma = 5.0;
    auto ts = detect::kf_init({0.0, 0.0}, 10.0, 5.0);
    ts.gate_gamma = 1e12;  // record raw NIS without gating side effects
    Rng rng(99);
    std::normal_distribution<double> meas(0.0, sigma);
    std::normal_distribution<double> accel(0.0, 1.0);
    Point2 pos{0.0, 0.0}, vel{10.0, 5.0};
    double nis_sum = 0.0;
    int n = 0, below_gate = 0;
    for (int epoch = 0; epoch < 1600; ++epoch) {
        detect::kf_predict(ts, 1.0, 1.0);
        const Point2 a{accel(rng), accel(rng)};
        pos = pos + vel + 0.5 * a;
        vel = vel + a;
        const Point2 z{pos.x + meas(rng), pos.y + meas(rng)};
        const auto v = detect::kf_update_gated(ts, z, sigma);
        REQUIRE(v.valid);
        if (epoch < 100) continue;  // settle first
        nis_sum += v.diagnostic;
        below_gate += v.diagnostic <= detect::kNisGate ? 1 : 0;
        ++n;
    }
    CHECK(nis_sum / n == doctest::Approx(2.0).epsilon(0.06));
    CHECK(double(below_gate) / n == doctest::Approx(0.85).epsilon(0.04));
}

TEST_CASE("gate constant matches the 85th chi-square(2) percentile") {
    CHECK(detect::kNisGate == doctest::Approx(3.794239969771762).epsilon(1e-12));
}

TEST_CASE("coasting grows uncertainty monotonically") {
    auto ts = detect::kf_init({0.0, 0.0}, 10.0, 5.0);
    double prev = ts.P.trace();
    for (int i = 0; i < 30; ++i) {
        detect::kf_predict(ts, 1.0, 1.0);
        const auto v = detect::kf_update_gated(ts, std::nullopt, 8.0);
        CHECK_FALSE(v.valid);
        CHECK(v.reason == "no measurement");
        CHECK(ts.coasting);
        CHECK(ts.P.trace() >= prev);
        prev = ts.P.trace();
    }
}

TEST_CASE("reacquisition needs consecutive gate passes") {
    auto ts = detect::kf_init({0.0, 0.0}, 5.0, 1.0);
    // a wild measurement trips the gate and starts coasting
    detect::kf_predict(ts, 1.0, 1.0);
    auto v = detect::kf_update_gated(ts, Point2{500.0, 0.0}, 8.0);
    CHECK_FALSE(v.valid);
    CHECK(v.reason == "innovation gate");
    CHECK(ts.coasting);

    // first consistent measurement: still pending
    detect::kf_predict(ts, 1.0, 1.0);
    v = detect::kf_update_gated(ts, Point2{0.5, 0.0}, 8.0);
    CHECK_FALSE(v.valid);
    CHECK(v.reason == "reacquisition pending");

    // second consecutive pass: back to normal updates
    detect::kf_predict(ts, 1.0, 1.0);
    v = detect::kf_update_gated(ts, Point2{0.5, 0.5}, 8.0);
    CHECK(v.valid);
    CHECK_FALSE(ts.coasting);
}

TEST_CASE("a gate failure resets the reacquisition count") {
    auto ts = detect::kf_init({0.0, 0.0}, 5.0, 1.0);
    detect::kf_predict(ts, 1.0, 1.0);
    CHECK_FALSE(detect::kf_update_gated(ts, Point2{500.0, 0.0}, 8.0).valid);
    detect::kf_predict(ts, 1.0, 1.0);
    CHECK(detect::kf_update_gated(ts, Point2{0.5, 0.0}, 8.0).reason == "reacquisition pending");
    // another outlier: back to square one
    detect::kf_predict(ts, 1.0, 1.0);
    CHECK(detect::kf_update_gated(ts, Point2{600.0, 0.0}, 8.0).reason == "innovation gate");
    detect::kf_predict(ts, 1.0, 1.0);
    CHECK(detect::kf_update_gated(ts, Point2{1.0, 0.0}, 8.0).reason == "reacquisition pending");
}
