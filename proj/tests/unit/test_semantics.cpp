// SPDX-License-Identifier: Apache-2.0
#include "iscsc/harness.hpp"
#include "iscsc/rng.hpp"
#include "iscsc/semantics.hpp"

#include <doctest.h>

#include <cmath>

using namespace iscsc;
using namespace iscsc::semantics;

TEST_SUITE("semantics") {

TEST_CASE("CU SINR by hand") {
    CVec h(2);
    h << 1.0, cd(0.0, 1.0);
    CMat w0 = CMat::Zero(2, 2);
    w0(0, 0) = 2.0;  // h^H w0 h = 2
    CMat w1 = CMat::Zero(2, 2);
    w1(1, 1) = 0.5;  // 0.5
    CMat r = 0.25 * CMat::Identity(2, 2);  // 0.5
    const std::vector<CVec> hs{h};
    const std::vector<CMat> ws{w0, w1};
    const std::vector<CMat> rs{r};
    CHECK(sinr_cu(0, hs, ws, rs, 1.0) == doctest::Approx(2.0 / (0.5 + 0.5 + 1.0)));
    CHECK(sinr_eve(0, h, ws, rs, 1.0, EveInterference::SensingOnly) == doctest::Approx(2.0 / 1.5));
    CHECK(sinr_eve(0, h, ws, rs, 1.0, EveInterference::CrossUser) == doctest::Approx(1.0));
}

TEST_CASE("semantic rate") {
    CHECK(semantic_rate(1.0, 3.0, 1.0) == doctest::Approx(2.0));
    CHECK(semantic_rate(0.5, 3.0, 1.1) == doctest::Approx(4.4));
    CHECK_THROWS_AS(semantic_rate(0.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(semantic_rate(1.5, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(semantic_rate(0.5, -1.0, 1.0), DomainError);
}

TEST_CASE("BLEU inversion over random cases") {
    const auto r = harness::check_bleu_inversion(21, 1000);
    INFO(r.detail);
    CHECK(r.passed);
    CHECK(r.seconds < 1.0);
}

TEST_CASE("BLEU inversion check catches a perturbed denominator") {
    const auto r = harness::check_bleu_inversion(21, 1000, 0.1);
    CHECK_FALSE(r.passed);
}

TEST_CASE("rho lower bound closed form") {
    const std::vector<double> w{0.25, 0.25, 0.25, 0.25};
    const std::vector<double> p{0.9, 0.8, 0.7, 0.6};
    double lp = 0.0;
    for (int g = 0; g < 4; ++g) lp += w[g] * std::log(p[g]);
    const double q = 0.3;
    CHECK(rho_lower_bound(q, w, p) == doctest::Approx(1.0 / (1.0 - std::log(q) + lp)));
    // BLEU is increasing in rho
    CHECK(bleu_oracle(0.5, w, p) < bleu_oracle(0.6, w, p));
    // the bound is the unique crossing
    const double rho = rho_lower_bound(q, w, p);
    CHECK(bleu_oracle(rho + 1e-4, w, p) > q);
}

TEST_CASE("rho lower bound edge cases") {
    const std::vector<double> w{1.0};
    const std::vector<double> p{0.8};
    // Q equal to BLEU(1): no compression possible
    CHECK(rho_lower_bound(bleu_oracle(1.0, w, p), w, p) == doctest::Approx(1.0));
    CHECK_THROWS_AS(rho_lower_bound(0.9, w, p), InfeasibleError);
    CHECK_THROWS_AS(rho_lower_bound(0.0, w, p), DomainError);
    const std::vector<double> p_bad{1.5};
    CHECK_THROWS_AS(rho_lower_bound(0.2, w, p_bad), DomainError);
    BleuParams override_params;
    override_params.rho_lower = 0.4;
    CHECK(rho_lower_bound(override_params) == 0.4);
}

TEST_CASE("computational power") {
    const std::vector<double> ones{1.0, 1.0};
    CHECK(computational_power(ones, 0.01) == 0.0);
    const std::vector<double> r{0.5, 0.25};
    CHECK(computational_power(r, 0.01) == doctest::Approx(-0.01 * (std::log(0.5) + std::log(0.25))));
    const std::vector<double> bad{0.0};
    CHECK_THROWS_AS(computational_power(bad, 0.01), DomainError);
}

TEST_CASE("transmit power is the trace sum") {
    const std::vector<CMat> w{2.0 * CMat::Identity(3, 3)};
    const std::vector<CMat> r{0.5 * CMat::Identity(3, 3), CMat::Identity(3, 3)};
    CHECK(transmit_power(w, r) == doctest::Approx(6.0 + 1.5 + 3.0));
    PowerBreakdown p{0.02, 0.08, 0.1};
    CHECK(p.total() == doctest::Approx(0.1));
    CHECK(p.within_budget());
    p.cs_w = 0.09;
    CHECK_FALSE(p.within_budget());
}

TEST_CASE("worst-case SSR is clamped at zero") {
    const auto cfg = harness::fast_scenario();
    const auto ch = synthesize_channels(cfg, 1);
    const int n = cfg.n_antennas;
    const std::vector<CMat> r{CMat::Zero(n, n)};
    // an eavesdropper with a stronger copy of the CU channel out-hears the CU
    ChannelSet strong = ch;
    strong.target_channels_est[0] = 2.0 * ch.cu_channels[0];
    strong.noise_sense_w = ch.noise_comm_w;
    const CVec c = ch.cu_channels[0] / ch.cu_channels[0].norm();
    const std::vector<CMat> w1{0.05 * c * c.adjoint(), CMat::Zero(n, n)};
    CHECK(worst_case_ssr(0, strong, w1, r, 1.0, 1.1) == 0.0);
    const double ssr = worst_case_ssr(0, ch, w1, r, 0.5, 1.1);
    const double s = semantic_rate(0.5, sinr_cu(0, ch.cu_channels, w1, r, ch.noise_comm_w), 1.1);
    CHECK(ssr > 0.0);
    CHECK(ssr < s);
}

}  // TEST_SUITE
