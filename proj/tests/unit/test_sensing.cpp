// SPDX-License-Identifier: Apache-2.0
#include "iscsc/harness.hpp"
#include "iscsc/rng.hpp"
#include "iscsc/sensing.hpp"

#include <doctest.h>

#include <cmath>

using namespace iscsc;
using namespace iscsc::sensing;

namespace {

CMat random_psd(Rng& rng, int n) {
    CMat g(n, n);
    for (int j = 0; j < n; ++j) g.col(j) = rng.complex_normal_vector(n, 1.0);
    return g * g.adjoint() / n;
}

}  // namespace

TEST_SUITE("sensing") {

TEST_CASE("steering vector closed form") {
    const double theta = 0.4;
    const CVec a = steering_vector(theta, 5, 0.5);
    for (int i = 0; i < 5; ++i) {
        const double phase = -kPi * i * std::sin(theta);
        CHECK(a[i].real() == doctest::Approx(std::cos(phase)));
        CHECK(a[i].imag() == doctest::Approx(std::sin(phase)));
    }
    CHECK(steering_vector(0.0, 4, 0.5).isApprox(CVec::Ones(4)));
    CHECK_THROWS_AS(steering_vector(2.0, 4, 0.5), DomainError);
}

TEST_CASE("steering derivative matches finite differences") {
    for (double theta : {-1.2, -0.3, 0.0, 0.7}) {
        const double h = 1e-6;
        const CVec fd = (steering_vector(theta + h, 8, 0.5) - steering_vector(theta - h, 8, 0.5)) / (2 * h);
        CHECK((fd - steering_derivative(theta, 8, 0.5)).norm() < 1e-7);
    }
}

TEST_CASE("FIM agrees with the finite-difference information of the echo model") {
    const auto r = harness::check_fim_finite_difference(11, 20);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("FIM functionals evaluate to the FIM") {
    Rng rng(3);
    for (int n : {2, 5, 8}) {
        const CMat rx = random_psd(rng, n);
        const cd beta(0.03, -0.02);
        const Fim direct = fim(0.2, beta, rx, 4, 1e-3);
        const Fim via = fim_functionals(0.2, beta, n, 4, 1e-3).evaluate(rx);
        CHECK(via.j_tt == doctest::Approx(direct.j_tt).epsilon(1e-12));
        CHECK(via.j_tb[0] == doctest::Approx(direct.j_tb[0]).epsilon(1e-12).scale(direct.j_tt));
        CHECK(via.j_tb[1] == doctest::Approx(direct.j_tb[1]).epsilon(1e-12).scale(direct.j_tt));
        CHECK(via.j_bb == doctest::Approx(direct.j_bb).epsilon(1e-12));
    }
}

TEST_CASE("CRB scales inversely with transmit power and snapshots") {
    Rng rng(4);
    const CMat rx = random_psd(rng, 6);
    const cd beta(0.1, 0.05);
    const double base = crb_theta(fim(-0.5, beta, rx, 1, 1e-6));
    CHECK(crb_theta(fim(-0.5, beta, 4.0 * rx, 1, 1e-6)) == doctest::Approx(base / 4.0));
    CHECK(crb_theta(fim(-0.5, beta, rx, 8, 1e-6)) == doctest::Approx(base / 8.0));
    CHECK(base > 0.0);
}

TEST_CASE("CRB equals the inverse Schur complement of the assembled FIM") {
    Rng rng(5);
    const CMat rx = random_psd(rng, 4);
    const Fim f = fim(0.9, cd(0.2, 0.1), rx, 2, 1e-4);
    const Eigen::Matrix3d inv = f.assembled().inverse();
    CHECK(crb_theta(f) == doctest::Approx(inv(0, 0)).epsilon(1e-9));
}

TEST_CASE("unidentifiable angle") {
    Fim f;
    CHECK_THROWS_AS(crb_theta(f), NumericalError);
    const CMat zero = CMat::Zero(4, 4);
    CHECK_THROWS_AS(crb_theta(fim(0.1, cd(0.1, 0), zero, 1, 1e-3)), NumericalError);
}

TEST_CASE("FIM input validation") {
    CMat rx = CMat::Identity(3, 3);
    CHECK_THROWS_AS(fim(0.1, 1.0, rx, 1, 0.0), DomainError);
    CHECK_THROWS_AS(fim(0.1, 1.0, rx, 0, 1.0), DomainError);
    rx(0, 0) = -1.0;
    CHECK_THROWS_AS(fim(0.1, 1.0, rx, 1, 1.0), DomainError);
    rx = CMat::Identity(3, 3);
    rx(0, 1) = cd(0.0, 1.0);
    CHECK_THROWS_AS(fim(0.1, 1.0, rx, 1, 1.0), DomainError);
}

TEST_CASE("sum RCRB is the sum of per-target roots") {
    const auto cfg = reference_scenario();
    const auto ch = synthesize_channels(cfg, 1);
    const CMat rx = 0.005 * CMat::Identity(20, 20);
    const auto crbs = target_crbs(rx, ch, 1);
    REQUIRE(crbs.size() == 3);
    double s = 0.0;
    for (double c : crbs) s += std::sqrt(c);
    CHECK(sum_rcrb(rx, ch, 1) == doctest::Approx(s));
}

TEST_CASE("noiseless ML estimate recovers the angle") {
    Rng rng(9);
    const int n = 8;
    std::vector<EchoSample> samples;
    CMat rx = CMat::Zero(n, n);
    for (int t = 0; t < 16; ++t) {
        const CVec x = rng.complex_normal_vector(n, 1.0);
        rx += x * x.adjoint() / 16.0;
        samples.push_back(simulate_echo(x, 0.37, cd(0.1, 0.2), 0.0, 1));
    }
    CHECK(estimate_angle_ml(samples, rx, 0.002) == doctest::Approx(0.37).epsilon(1e-9));
}

TEST_CASE("ML MSE respects the CRB at moderate trial counts") {
    MseCrbSetup setup;
    const std::vector<double> snr{10.0, 20.0};
    const auto rows = mse_vs_crb(setup, snr, 200);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.mse >= 0.8 * r.crb);
        CHECK(r.mse <= 10.0 * r.crb);
    }
    CHECK(rows[1].crb == doctest::Approx(rows[0].crb / 10.0));
}

}  // TEST_SUITE
