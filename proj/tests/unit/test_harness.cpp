// SPDX-License-Identifier: Apache-2.0
#include "iscsc/harness.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace iscsc;
using namespace iscsc::harness;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("iscsc_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ScenarioConfig tiny() {
    ScenarioConfig c = fast_scenario();
    c.n_antennas = 4;
    c.target_angles = {40.0};
    c.error_radius = {0.01};
    c.pathloss_oneway = {0.1};
    c.pathloss_roundtrip = {0.1};
    c.randomization_count = 20;
    return c;
}

SweepRow row(double p, opt::Mode m, std::uint64_t seed, double rate) {
    SweepRow r;
    r.power_dbm = p;
    r.mode = m;
    r.seed = seed;
    r.sum_semantic_rate = rate;
    r.sum_ssr = 0.5 * rate;
    r.sum_rcrb = 1.25e-3;
    r.p_comp_w = 0.0125;
    r.p_cs_w = 0.0875;
    r.iters = 4;
    r.status = "optimal";
    return r;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("exit codes") {
    CHECK(exit_code(opt::RunStatus::Optimal) == ExitCode::Ok);
    CHECK(static_cast<int>(exit_code(opt::RunStatus::Infeasible)) == 2);
    CHECK(static_cast<int>(exit_code(opt::RunStatus::NumericalLimit)) == 3);
}

TEST_CASE("solver tolerance from the environment") {
    ::unsetenv("ISCSC_SOLVER_TOL");
    CHECK_FALSE(solver_tol_from_env().has_value());
    ::setenv("ISCSC_SOLVER_TOL", "1e-6", 1);
    REQUIRE(solver_tol_from_env().has_value());
    CHECK(*solver_tol_from_env() == 1e-6);
    ::setenv("ISCSC_SOLVER_TOL", "abc", 1);
    CHECK_THROWS_AS(solver_tol_from_env(), UsageError);
    ::unsetenv("ISCSC_SOLVER_TOL");
}

TEST_CASE("sweep table CSV round trip") {
    SweepTable t;
    CHECK(t.upsert(row(20, opt::Mode::RhoFixed1, 0, 3.0), false));
    CHECK(t.upsert(row(15, opt::Mode::Full, 1, 2.0), false));
    CHECK(t.upsert(row(15, opt::Mode::Full, 0, 1.0), false));
    // duplicates are kept unless replaced
    CHECK_FALSE(t.upsert(row(15, opt::Mode::Full, 0, 9.0), false));
    CHECK(t.find(15, opt::Mode::Full, 0)->sum_semantic_rate == 1.0);
    CHECK(t.upsert(row(15, opt::Mode::Full, 0, 9.0), true));
    CHECK(t.find(15, opt::Mode::Full, 0)->sum_semantic_rate == 9.0);
    REQUIRE(t.rows().size() == 3);
    CHECK(t.rows()[0].seed == 0);
    CHECK(t.rows()[1].seed == 1);
    CHECK(t.rows()[2].mode == opt::Mode::RhoFixed1);

    const std::string csv = t.to_csv();
    CHECK(csv.rfind(std::string(SweepTable::kHeader) + "\n", 0) == 0);
    const SweepTable back = SweepTable::from_csv(csv);
    CHECK(back.to_csv() == csv);
    CHECK(back.find(20, opt::Mode::RhoFixed1, 0)->sum_rcrb == 1.25e-3);

    CHECK_THROWS_AS(SweepTable::from_csv("power,mode\n1,full\n"), IoError);
    CHECK(SweepTable::load(fresh_dir("absent") / "none.csv").rows().empty());
}

TEST_CASE("sweep resumes without recomputation") {
    const auto dir = fresh_dir("sweep");
    SweepOptions o;
    o.powers_dbm = {20};
    o.modes = {opt::Mode::RhoFixed1};
    int computed = 0;
    o.on_row = [&](const SweepRow&) { ++computed; };
    const auto first = cmd_sweep(tiny(), o, dir);
    REQUIRE(first.rows().size() == 1);
    CHECK(first.rows()[0].status == "optimal");
    CHECK(computed == 1);
    CHECK(fs::exists(dir / "sweep.csv"));
    CHECK(fs::exists(dir / "reports" / "rho1_20dBm_seed0.json"));

    const auto second = cmd_sweep(tiny(), o, dir);
    CHECK(computed == 1);
    CHECK(second.to_csv() == first.to_csv());

    o.force = true;
    const auto third = cmd_sweep(tiny(), o, dir);
    CHECK(computed == 2);
    CHECK(third.to_csv() == first.to_csv());

    write_plots(third, dir);
    CHECK(fs::exists(dir / "fig_rate.csv"));
}

TEST_CASE("reports verify and tampering is detected") {
    const auto dir = fresh_dir("report");
    const auto out = cmd_solve(tiny(), opt::Mode::Full, 2, dir);
    REQUIRE(out.result.report.status == opt::RunStatus::Optimal);
    const auto stored = read_json(dir / "report.json");
    CHECK(stored == out.report);
    const auto v = verify_report(stored);
    INFO(v.worst_field << " " << v.worst_error);
    CHECK(v.ok);
    CHECK(v.digest_ok);

    auto bad = stored;
    bad["totals"]["sum_semantic_rate"] = bad["totals"]["sum_semantic_rate"].get<double>() * 1.01;
    const auto vb = verify_report(bad);
    CHECK_FALSE(vb.ok);
    CHECK(vb.worst_field == "totals.sum_semantic_rate");

    auto bad_digest = stored;
    bad_digest["digest"] = "0000000000000000";
    CHECK_FALSE(verify_report(bad_digest).digest_ok);
}

TEST_CASE("I/O errors") {
    CHECK_THROWS_AS(read_json(fresh_dir("io") / "nope.json"), IoError);
    const auto file = fresh_dir("io2") / "plain";
    std::ofstream(file) << "x";
    CHECK_THROWS_AS(ensure_writable_dir(file), IoError);
}

TEST_CASE("mse-crb input checks") {
    const auto dir = fresh_dir("msecrb");
    CHECK_THROWS_AS(cmd_mse_crb(fast_scenario(), {10.0}, 10, dir), UsageError);
    CHECK_THROWS_AS(cmd_mse_crb(fast_scenario(), {}, 200, dir), UsageError);
    const auto rows = cmd_mse_crb(fast_scenario(), {20.0}, 100, dir);
    REQUIRE(rows.size() == 1);
    CHECK(fs::exists(dir / "mse_crb.csv"));
}

TEST_CASE("validate passes and the mutation hook fails it") {
    ValidateOptions o;
    o.include_solve = false;
    for (const auto& c : cmd_validate(o)) {
        INFO(c.name << ": " << c.detail);
        CHECK(c.passed);
    }
    o.bleu_denominator_shift = 0.1;
    bool any_failed = false;
    for (const auto& c : cmd_validate(o)) any_failed = any_failed || !c.passed;
    CHECK(any_failed);
}

}  // TEST_SUITE
