// SPDX-License-Identifier: Apache-2.0
#include "iscsc/scenario.hpp"
#include "iscsc/sensing.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace iscsc;
using nlohmann::json;

namespace {

json minimal_json() {
    return json::parse(R"({
        "n_antennas": 6, "cu_angles": [-30, 20], "target_angles": [40],
        "noise_comm_dbm": -30, "noise_sense_dbm": -30, "power_budget_dbm": 20,
        "iota": 1.1, "kappa": 0.5, "qos_threshold": 1.0,
        "bleu_params": [{"rho_lower": 0.4},
                        {"global_bound": 0.5, "weights": [0.5, 0.5], "precisions": [0.9, 0.8]}]
    })");
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("dBm conversion") {
    CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
    CHECK(dbm_to_watts(20.0) == doctest::Approx(0.1));
    CHECK(dbm_to_watts(-30.0) == doctest::Approx(1e-6));
    CHECK(watts_to_dbm(dbm_to_watts(17.3)) == doctest::Approx(17.3));
    CHECK_THROWS_AS(watts_to_dbm(0.0), DomainError);
}

TEST_CASE("reference scenario shape") {
    const auto c = reference_scenario();
    CHECK(c.n_antennas == 20);
    CHECK(c.num_cus() == 2);
    CHECK(c.num_targets() == 3);
    CHECK(c.power_budget_dbm == 20.0);
    CHECK(c.iota == 1.1);
    CHECK(c.kappa == 0.5);
    CHECK(*c.bleu_params[0].rho_lower == 0.4);
    CHECK(*c.bleu_params[1].rho_lower == 0.33);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("JSON defaults and round trip") {
    const auto c = scenario_from_json(minimal_json());
    CHECK(c.error_radius == std::vector<double>{0.01});
    CHECK(c.pathloss_oneway.size() == 1);
    CHECK(c.solver_tol == 1e-8);
    CHECK(c.max_outer_iters == 50);
    CHECK(c.randomization_count == 100);
    CHECK_FALSE(c.normalize_objective);

    const auto again = scenario_from_json(scenario_to_json(c));
    CHECK(scenario_to_json(again) == scenario_to_json(c));
    CHECK(scenario_digest(again, 3) == scenario_digest(c, 3));
}

TEST_CASE("file round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "iscsc_scenario_test";
    std::filesystem::create_directories(dir);
    const auto c = reference_scenario();
    save_scenario(c, dir / "s.json");
    CHECK(scenario_to_json(load_scenario(dir / "s.json")) == scenario_to_json(c));
    CHECK_THROWS_AS(load_scenario(dir / "missing.json"), ConfigError);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(load_scenario(dir / "bad.json"), ConfigError);
}

TEST_CASE("invalid configs name the field") {
    auto expect_field = [](json j, const std::string& field) {
        try {
            scenario_from_json(j);
            FAIL("accepted an invalid config");
        } catch (const ConfigError& e) {
            CHECK(e.field() == field);
        }
    };
    auto j = minimal_json();
    j["cu_angles"] = json::array();
    j["bleu_params"] = json::array();
    expect_field(j, "cu_angles");

    j = minimal_json();
    j["kappa"] = 1.5;
    expect_field(j, "kappa");

    j = minimal_json();
    j["error_radius"] = {0.01, 0.02};
    expect_field(j, "error_radius");

    j = minimal_json();
    j["typo_key"] = 1;
    expect_field(j, "typo_key");

    j = minimal_json();
    j.erase("iota");
    expect_field(j, "iota");

    j = minimal_json();
    j["target_angles"] = {95};
    expect_field(j, "target_angles");

    j = minimal_json();
    j["bleu_params"][1]["weights"] = {0.5, 0.6};
    expect_field(j, "bleu_params");

    j = minimal_json();
    j["n_antennas"] = 2;
    expect_field(j, "n_antennas");
}

TEST_CASE("no targets is a valid design") {
    auto j = minimal_json();
    j["target_angles"] = json::array();
    const auto c = scenario_from_json(j);
    CHECK(c.num_targets() == 0);
    const auto ch = synthesize_channels(c, 1);
    CHECK(ch.num_targets() == 0);
}

TEST_CASE("digest is stable and sensitive") {
    const auto c = reference_scenario();
    CHECK(scenario_digest(c, 7) == scenario_digest(c, 7));
    CHECK(scenario_digest(c, 7).size() == 16);
    CHECK(scenario_digest(c, 7) != scenario_digest(c, 8));
    auto d = c;
    d.power_budget_dbm = 25.0;
    CHECK(scenario_digest(c, 7) != scenario_digest(d, 7));
}

TEST_CASE("channels follow the geometry") {
    const auto c = reference_scenario();
    const auto ch = synthesize_channels(c, 5);
    REQUIRE(ch.num_cus() == 2);
    REQUIRE(ch.num_targets() == 3);
    CHECK(ch.noise_comm_w == doctest::Approx(1e-6));
    for (int k = 0; k < 2; ++k) {
        const CVec a = sensing::steering_vector(deg_to_rad(c.cu_angles[k]), 20, 0.5);
        CHECK((ch.cu_channels[k] - a).norm() < 1e-14);
    }
    for (int l = 0; l < 3; ++l) {
        const CVec a = sensing::steering_vector(deg_to_rad(c.target_angles[l]), 20, 0.5);
        CHECK((ch.target_channels_est[l] - 0.1 * a).norm() < 1e-14);
        CHECK(ch.target_angles_rad[l] == doctest::Approx(c.target_angles[l] * kPi / 180.0));
    }
}

TEST_CASE("Rician channels are seeded") {
    auto c = reference_scenario();
    c.cu_channel_model = CuChannelModel::Rician;
    const auto a = synthesize_channels(c, 11);
    const auto b = synthesize_channels(c, 11);
    const auto d = synthesize_channels(c, 12);
    CHECK((a.cu_channels[0] - b.cu_channels[0]).norm() == 0.0);
    CHECK((a.cu_channels[0] - d.cu_channels[0]).norm() > 1e-3);
}

}  // TEST_SUITE
