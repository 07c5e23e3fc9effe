// SPDX-License-Identifier: Apache-2.0
#include "iscsc/harness.hpp"
#include "iscsc/optimizer.hpp"
#include "iscsc/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace iscsc;
using namespace iscsc::opt;

namespace {

/// N = 4, one target: small enough for many runs in a unit test.
ScenarioConfig tiny_scenario() {
    ScenarioConfig c = harness::fast_scenario();
    c.n_antennas = 4;
    c.target_angles = {40.0};
    c.error_radius = {0.01};
    c.pathloss_oneway = {0.1};
    c.pathloss_roundtrip = {0.1};
    c.randomization_count = 30;
    return c;
}

CMat random_psd(Rng& rng, int n, int rank, double scale) {
    CMat g(n, rank);
    for (int j = 0; j < rank; ++j) g.col(j) = rng.complex_normal_vector(n, 1.0);
    return (scale / rank) * g * g.adjoint();
}

void check_run_invariants(const ScenarioConfig& cfg, const ChannelSet& ch, const RunResult& r) {
    REQUIRE(r.report.status == RunStatus::Optimal);
    // objective non-decreasing across the recorded steps
    for (std::size_t i = 1; i < r.report.trace.size(); ++i) {
        const auto& a = r.report.trace[i - 1];
        const auto& b = r.report.trace[i];
        INFO("step " << b.outer << " " << b.step);
        CHECK(b.objective >= a.objective - 1e-6 * std::max(1.0, std::abs(a.objective)));
        CHECK(b.power_slack_w >= -1e-6);
    }
    const auto& m = r.solution.metrics;
    CHECK(m.power.total() <= m.power.budget_w + 1e-6);
    CHECK(harness::robust_violation(ch, r.solution, 2000, 5) <= 1e-6);
    for (std::size_t k = 0; k < m.rho.size(); ++k) {
        CHECK(m.rho[k] > 0.0);
        CHECK(m.rho[k] <= 1.0);
    }
    if (cfg.qos_threshold > 0.0)
        for (double s : m.semantic_rate) CHECK(s >= cfg.qos_threshold - 1e-6);
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("mode names") {
    CHECK(parse_mode("full") == Mode::Full);
    CHECK(parse_mode("rho-fixed-1") == Mode::RhoFixed1);
    CHECK(parse_mode("rho1") == Mode::RhoFixed1);
    CHECK(parse_mode("conventional-isac") == Mode::Conventional);
    CHECK_THROWS_AS(parse_mode("fast"), ConfigError);
    CHECK(std::string(to_string(Mode::RhoFixed1)) == "rho1");
}

TEST_CASE("Taylor rate surrogate is a tight lower bound") {
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        const double a = 1.0 + 10.0 * rng.uniform();
        const double b = 0.1 + 0.8 * rng.uniform() * a;
        const double bi = 0.1 + 2.0 * rng.uniform();
        const double rho = 0.3 + 0.7 * rng.uniform();
        const double exact = 1.1 / rho * std::log2(a / b);
        CHECK(taylor_rate_value(a, b, bi, rho, 1.1) <= exact + 1e-12);
        CHECK(taylor_rate_value(a, b, b, rho, 1.1) == doctest::Approx(exact));

        const double lam = 5.0 * rng.uniform();
        const double ci = 1.0 + 5.0 * rng.uniform();
        const double exact_l = -1.1 / rho * std::log2(1.0 + lam);
        CHECK(taylor_lambda_value(lam, ci, rho, 1.1) <= exact_l + 1e-12);
        CHECK(taylor_lambda_value(lam, 1.0 + lam, rho, 1.1) == doctest::Approx(exact_l));
    }
}

TEST_CASE("lambda certificate survives sampling and is tight") {
    const auto r = harness::check_sprocedure_sampling(4, 10000);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("lambda certificate brackets the feasibility threshold") {
    Rng rng(12);
    const int n = 5;
    const CVec v = rng.complex_normal_vector(n, 0.1);
    const CMat w = v * v.adjoint();
    const CMat r = random_psd(rng, n, 2, 0.05);
    const CVec h = 0.1 * rng.complex_normal_vector(n, 1.0);
    const auto cert = certify_lambda(w, r, h, 0.02, 1e-6);
    CHECK(cert.lambda > 0.0);
    CHECK(cert.t >= 0.0);
    CHECK(sprocedure_feasible(w, r, h, 0.02, 1e-6, cert.lambda * (1 + 1e-9)));
    CHECK_FALSE(sprocedure_feasible(w, r, h, 0.02, 1e-6, cert.lambda * (1 - 1e-6)));
    // zero radius: the estimate itself
    const double at_est = (h.adjoint() * w * h)(0).real() / ((h.adjoint() * r * h)(0).real() + 1e-6);
    CHECK(certify_lambda(w, r, h, 0.0, 1e-6).lambda == doctest::Approx(at_est).epsilon(1e-12));
    CHECK_THROWS_AS(certify_lambda(w, r, h, -1.0, 1e-6), DomainError);
}

TEST_CASE("extraction ratios match a brute-force search") {
    Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const std::vector<double> c{0.5 + rng.uniform(), 0.5 + rng.uniform()};
        RhoBounds b;
        b.lower = {0.2 + 0.2 * rng.uniform(), 0.2 + 0.2 * rng.uniform()};
        b.upper = {0.8 + 0.2 * rng.uniform(), 1.0};
        const double f = 0.01;
        const double left = f * (0.2 + 2.0 * rng.uniform());
        double grid_best = -1.0;
        for (int i = 0; i <= 4000; ++i) {
            const double r1 = b.lower[0] + (b.upper[0] - b.lower[0]) * i / 4000.0;
            const double r2 = std::max(b.lower[1], std::exp(-left / f) / r1);
            if (r2 > b.upper[1] * (1 + 1e-12)) continue;
            grid_best = std::max(grid_best, c[0] / r1 + c[1] / r2);
        }
        if (grid_best < 0.0) {
            CHECK_THROWS_AS(maximize_rho(c, b, f, left), InfeasibleError);
            continue;
        }
        const auto rho = maximize_rho(c, b, f, left);
        const double got = c[0] / rho[0] + c[1] / rho[1];
        CHECK(got >= grid_best * (1 - 1e-6));
        CHECK(-f * (std::log(rho[0]) + std::log(rho[1])) <= left + 1e-12);
        for (int k = 0; k < 2; ++k) {
            CHECK(rho[k] >= b.lower[k] - 1e-12);
            CHECK(rho[k] <= b.upper[k] + 1e-12);
        }
    }
}

TEST_CASE("extraction ratios: infeasible inputs") {
    const std::vector<double> c{1.0};
    RhoBounds b{{0.6}, {0.5}};
    CHECK_THROWS_AS(maximize_rho(c, b, 0.01, 1.0), InfeasibleError);
    RhoBounds b2{{0.2}, {0.5}};
    CHECK_THROWS_AS(maximize_rho(c, b2, 0.01, 0.001), InfeasibleError);  // -F ln 0.5 > 0.001
    CHECK_THROWS_AS(maximize_rho(c, b2, 0.0, 1.0), DomainError);
}

TEST_CASE("randomization of a rank-one input returns its factor") {
    Rng rng(3);
    const CVec v = rng.complex_normal_vector(4, 1.0);
    const std::vector<CMat> w{v * v.adjoint()};
    int calls = 0;
    const CandidateScore score = [&](const std::vector<CVec>& x) -> std::optional<double> {
        ++calls;
        return (x[0] * x[0].adjoint() - w[0]).norm() < 1e-9 ? std::optional<double>(1.0) : std::nullopt;
    };
    const auto r = gaussian_randomization(w, 20, score, 9);
    CHECK(r.feasible);
    CHECK(calls == 21);
    CHECK((r.vectors[0] * r.vectors[0].adjoint() - w[0]).norm() < 1e-9);
}

TEST_CASE("randomization keeps the best feasible sample and falls back otherwise") {
    Rng rng(4);
    const CMat w = random_psd(rng, 4, 4, 1.0);
    const std::vector<CMat> ws{w};
    const CVec h = rng.complex_normal_vector(4, 1.0);
    const CandidateScore gain = [&](const std::vector<CVec>& x) -> std::optional<double> {
        return std::norm(h.dot(x[0]));
    };
    const auto r = gaussian_randomization(ws, 200, gain, 1);
    CHECK(r.feasible);
    CHECK(r.vectors[0].squaredNorm() == doctest::Approx(w.trace().real()));
    CHECK(r.objective == doctest::Approx(std::norm(h.dot(r.vectors[0]))));

    const CandidateScore never = [](const std::vector<CVec>&) -> std::optional<double> { return std::nullopt; };
    const auto f = gaussian_randomization(ws, 10, never, 1);
    CHECK_FALSE(f.feasible);
    CHECK_FALSE(f.from_samples);
    CHECK(f.vectors[0].squaredNorm() == doctest::Approx(w.trace().real()));
}

TEST_CASE("initial state is feasible") {
    const auto cfg = tiny_scenario();
    const auto ch = synthesize_channels(cfg, 1);
    const Design d = make_design(cfg, ch, Mode::Full);
    const IterateState s = initial_state(d);
    double cs = 0.0;
    for (const auto& w : s.w_mats) cs += w.trace().real();
    for (const auto& r : s.r_mats) cs += r.trace().real();
    CHECK(cs == doctest::Approx(0.8 * d.budget_w));
    CHECK(semantics::computational_power(s.rho, cfg.f_coeff) + cs <= d.budget_w + 1e-12);
    REQUIRE(s.lambda.size() == 2);
}

TEST_CASE("full run on a tiny scenario") {
    const auto cfg = tiny_scenario();
    const auto ch = synthesize_channels(cfg, 1);
    const auto r = run_algorithm1(cfg, ch, Mode::Full);
    check_run_invariants(cfg, ch, r);
    CHECK(r.report.converged);
    CHECK(r.solution.metrics.power.comp_w > 0.0);
    CHECK(r.solution.randomized_objective <= r.solution.sdr_objective + 1e-3 * std::abs(r.solution.sdr_objective));
    CHECK(r.solution.sdr_gap <= 0.05);
}

TEST_CASE("rho fixed to one spends no compute power") {
    const auto cfg = tiny_scenario();
    const auto ch = synthesize_channels(cfg, 1);
    const auto r = run_algorithm1(cfg, ch, Mode::RhoFixed1);
    check_run_invariants(cfg, ch, r);
    CHECK(r.solution.metrics.power.comp_w == 0.0);
    for (double rho : r.solution.rho) CHECK(rho == 1.0);
}

TEST_CASE("conventional mode runs") {
    const auto cfg = tiny_scenario();
    const auto ch = synthesize_channels(cfg, 1);
    check_run_invariants(cfg, ch, run_algorithm1(cfg, ch, Mode::Conventional));
}

TEST_CASE("no targets") {
    auto cfg = tiny_scenario();
    cfg.target_angles.clear();
    cfg.error_radius.clear();
    cfg.pathloss_oneway.clear();
    cfg.pathloss_roundtrip.clear();
    const auto ch = synthesize_channels(cfg, 1);
    const auto r = run_algorithm1(cfg, ch, Mode::Full);
    REQUIRE(r.report.status == RunStatus::Optimal);
    CHECK(r.solution.metrics.crb.empty());
    CHECK(r.solution.metrics.sum_rcrb == 0.0);
    CHECK(r.solution.metrics.power.total() <= r.solution.metrics.power.budget_w + 1e-6);
}

TEST_CASE("zero uncertainty radius") {
    auto cfg = tiny_scenario();
    cfg.error_radius = {0.0};
    const auto ch = synthesize_channels(cfg, 1);
    const auto r = run_algorithm1(cfg, ch, Mode::Full);
    check_run_invariants(cfg, ch, r);
    // with eps = 0 the certificate is the SINR at the estimate
    const auto& m = r.solution.metrics;
    for (double margin : m.lambda_margin) CHECK(margin == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
}

TEST_CASE("per-target sensing covariances") {
    auto cfg = harness::fast_scenario();
    cfg.n_antennas = 5;
    cfg.sensing_covariance = SensingCovariance::PerTarget;
    cfg.randomization_count = 20;
    const auto ch = synthesize_channels(cfg, 1);
    const auto r = run_algorithm1(cfg, ch, Mode::Full);
    check_run_invariants(cfg, ch, r);
    CHECK(r.solution.r_mats.size() == 2);
}

TEST_CASE("CRB bound is consistent with the independent CRB") {
    const auto cfg = tiny_scenario();
    const auto ch = synthesize_channels(cfg, 1);
    const Design d = make_design(cfg, ch, Mode::Full);
    const IterateState s0 = initial_state(d);
    Step1Problem p = build_step1(d, s0);
    const auto o = sdp::solve(p.problem, cfg.solver_tol);
    REQUIRE(o.optimal());
    const IterateState s1 = read_step1(d, p, o, s0);
    const CMat rx = s1.transmit_covariance(d.n());
    for (int l = 0; l < d.l(); ++l) {
        const double crb = sensing::crb_theta(sensing::fim(ch.target_angles_rad[l], ch.beta[l], rx, cfg.snapshots,
                                                           ch.noise_sense_w));
        CHECK(1.0 / s1.u_caps[l] >= crb * (1 - 1e-5));
    }
}

TEST_CASE("Step 1 never lowers the objective") {
    const auto cfg = tiny_scenario();
    const auto ch = synthesize_channels(cfg, 2);
    const Design d = make_design(cfg, ch, Mode::Full);
    IterateState s = initial_state(d);
    for (int i = 0; i < 3; ++i) {
        Step1Problem p = build_step1(d, s);
        const auto o = sdp::solve(p.problem, cfg.solver_tol);
        REQUIRE(o.optimal());
        IterateState next = read_step1(d, p, o, s);
        next.objective_value = objective(d, next);
        CHECK(next.objective_value >= s.objective_value - 1e-6 * std::max(1.0, std::abs(s.objective_value)));
        s = next;
    }
}

}  // TEST_SUITE
