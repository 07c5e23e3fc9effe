// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "iscsc/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace iscsc {

/// BLEU description of one communication user. Either the n-gram triple
/// (global bound, weights, precisions) or a direct `rho_lower` override.
struct BleuParams {
    double global_bound = 0.5;
    std::vector<double> weights;
    std::vector<double> precisions;
    std::optional<double> rho_lower;
};

enum class CuChannelModel { LineOfSight, Rician };
enum class SensingCovariance { Aggregate, PerTarget };

struct ScenarioConfig {
    int n_antennas = 20;
    double spacing_ratio = 0.5;
    std::vector<double> cu_angles;      // degrees
    std::vector<double> target_angles;  // degrees
    double noise_comm_dbm = -30.0;
    double noise_sense_dbm = -30.0;
    std::optional<double> noise_echo_dbm;  // matched-filter noise; defaults to noise_sense_dbm
    double power_budget_dbm = 20.0;
    double iota = 1.1;
    double kappa = 0.5;
    double qos_threshold = 1.0;
    std::vector<double> error_radius;
    double f_coeff = 0.01;
    int snapshots = 1;
    std::vector<cd> pathloss_oneway;
    std::vector<cd> pathloss_roundtrip;
    std::vector<BleuParams> bleu_params;
    std::uint64_t seed = 0;

    double solver_tol = 1e-8;
    double outer_tol = 1e-4;
    int max_outer_iters = 50;
    int max_inner_iters = 30;
    int randomization_count = 100;

    CuChannelModel cu_channel_model = CuChannelModel::LineOfSight;
    double rician_k_factor = 10.0;
    SensingCovariance sensing_covariance = SensingCovariance::Aggregate;
    bool normalize_objective = false;

    int num_cus() const { return static_cast<int>(cu_angles.size()); }
    int num_targets() const { return static_cast<int>(target_angles.size()); }
};

/// Realized channels of one scenario. Angles are in radians; powers in watts.
struct ChannelSet {
    int n_antennas = 0;
    double spacing_ratio = 0.5;
    std::vector<CVec> cu_channels;
    std::vector<CVec> target_channels_est;
    std::vector<double> target_angles_rad;
    std::vector<cd> alpha;
    std::vector<cd> beta;
    std::vector<double> error_radius;
    double noise_comm_w = 0.0;
    double noise_sense_w = 0.0;
    double noise_echo_w = 0.0;

    int num_cus() const { return static_cast<int>(cu_channels.size()); }
    int num_targets() const { return static_cast<int>(target_channels_est.size()); }
};

double dbm_to_watts(double p_dbm);
double watts_to_dbm(double p_w);
double deg_to_rad(double deg);

/// Throws ConfigError naming the first violated field.
void validate(const ScenarioConfig& cfg);

/// Fills defaults for absent optional keys and validates.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);

ScenarioConfig load_scenario(const std::filesystem::path& path);
void save_scenario(const ScenarioConfig& cfg, const std::filesystem::path& path);

/// The published experiment: N=20, CUs at -30/20 deg, targets at -35/5/40 deg,
/// -30 dBm noise, 20 dBm budget, iota=1.1, kappa=0.5, rho bounds 0.4/0.33.
ScenarioConfig reference_scenario();

/// Deterministic in (cfg, seed). Target channels are alpha_l a(theta_l); CU
/// channels are a(theta_k) (line of sight) or seeded Rician.
ChannelSet synthesize_channels(const ScenarioConfig& cfg, std::uint64_t seed);

/// Stable 64-bit digest of the canonical config JSON and seed, as 16 hex chars.
std::string scenario_digest(const ScenarioConfig& cfg, std::uint64_t seed);

}  // namespace iscsc
