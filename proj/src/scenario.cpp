// SPDX-License-Identifier: Apache-2.0
#include "iscsc/scenario.hpp"

#include "iscsc/rng.hpp"
#include "iscsc/sensing.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace iscsc {

using nlohmann::json;

double dbm_to_watts(double p_dbm) { return std::pow(10.0, (p_dbm - 30.0) / 10.0); }

double watts_to_dbm(double p_w) {
    if (!(p_w > 0.0)) throw DomainError("power must be positive to express in dBm");
    return 10.0 * std::log10(p_w) + 30.0;
}

double deg_to_rad(double deg) { return deg * kPi / 180.0; }

namespace {

void check(bool ok, const char* field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
}

void check_angles(const std::vector<double>& angles, const char* field) {
    for (double a : angles)
        check(std::isfinite(a) && std::abs(a) <= 90.0, field, "angles must lie in [-90, 90] degrees");
}

cd complex_from_json(const json& j, const char* field) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
    if (j.is_object() && j.contains("re")) return {j.at("re").get<double>(), j.value("im", 0.0)};
    throw ConfigError(field, "expected a number, [re, im] or {\"re\", \"im\"}");
}

std::vector<cd> complex_list(const json& j, const char* field) {
    if (!j.is_array()) throw ConfigError(field, "expected a list");
    std::vector<cd> out;
    for (const auto& e : j) out.push_back(complex_from_json(e, field));
    return out;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, e.what());
    }
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
    const int k = cfg.num_cus();
    const int l = cfg.num_targets();
    check(cfg.n_antennas >= 1, "n_antennas", "must be positive");
    check(k >= 1, "cu_angles", "at least one communication user is required");
    check(l >= 0, "target_angles", "invalid target list");
    check(cfg.n_antennas >= k + l, "n_antennas", "need n_antennas >= K + L spatial degrees of freedom");
    check(std::isfinite(cfg.spacing_ratio) && cfg.spacing_ratio > 0.0, "spacing_ratio", "must be positive");
    check_angles(cfg.cu_angles, "cu_angles");
    check_angles(cfg.target_angles, "target_angles");
    check(std::isfinite(cfg.noise_comm_dbm), "noise_comm_dbm", "must be finite");
    check(std::isfinite(cfg.noise_sense_dbm), "noise_sense_dbm", "must be finite");
    check(!cfg.noise_echo_dbm || std::isfinite(*cfg.noise_echo_dbm), "noise_echo_dbm", "must be finite");
    check(std::isfinite(cfg.power_budget_dbm) && dbm_to_watts(cfg.power_budget_dbm) > 0.0,
          "power_budget_dbm", "must convert to a positive power");
    check(cfg.iota > 0.0, "iota", "must be positive");
    check(cfg.kappa >= 0.0 && cfg.kappa <= 1.0, "kappa", "must lie in [0, 1]");
    check(cfg.qos_threshold >= 0.0, "qos_threshold", "must be non-negative");
    check(static_cast<int>(cfg.error_radius.size()) == l, "error_radius", "needs one radius per target");
    for (double e : cfg.error_radius) check(e >= 0.0 && std::isfinite(e), "error_radius", "radii must be >= 0");
    check(cfg.f_coeff > 0.0, "f_coeff", "must be positive");
    check(cfg.snapshots >= 1, "snapshots", "must be positive");
    check(static_cast<int>(cfg.pathloss_oneway.size()) == l, "pathloss_oneway", "needs one value per target");
    check(static_cast<int>(cfg.pathloss_roundtrip.size()) == l, "pathloss_roundtrip", "needs one value per target");
    check(static_cast<int>(cfg.bleu_params.size()) == k, "bleu_params", "needs one entry per CU");
    for (const auto& b : cfg.bleu_params) {
        if (b.rho_lower) {
            check(*b.rho_lower > 0.0 && *b.rho_lower <= 1.0, "bleu_params", "rho_lower must lie in (0, 1]");
            continue;
        }
        check(b.global_bound > 0.0 && b.global_bound <= 1.0, "bleu_params", "global_bound must lie in (0, 1]");
        check(!b.weights.empty() && b.weights.size() == b.precisions.size(), "bleu_params",
              "weights and precisions must be non-empty and of equal length");
        double sum = 0.0;
        for (double w : b.weights) {
            check(w >= 0.0, "bleu_params", "weights must be non-negative");
            sum += w;
        }
        check(std::abs(sum - 1.0) <= 1e-9, "bleu_params", "weights must sum to 1");
        for (double p : b.precisions)
            check(p > 0.0 && p <= 1.0, "bleu_params", "precisions must lie in (0, 1]");
    }
    check(cfg.solver_tol > 0.0, "solver_tol", "must be positive");
    check(cfg.outer_tol > 0.0, "outer_tol", "must be positive");
    check(cfg.max_outer_iters >= 1, "max_outer_iters", "must be positive");
    check(cfg.max_inner_iters >= 1, "max_inner_iters", "must be positive");
    check(cfg.randomization_count >= 0, "randomization_count", "must be non-negative");
    check(cfg.rician_k_factor >= 0.0, "rician_k_factor", "must be non-negative");
}

ScenarioConfig scenario_from_json(const json& j) {
    static const std::set<std::string> known = {
        "n_antennas", "spacing_ratio", "cu_angles", "target_angles", "noise_comm_dbm",
        "noise_sense_dbm", "noise_echo_dbm", "power_budget_dbm", "iota", "kappa", "qos_threshold",
        "error_radius", "f_coeff", "snapshots", "pathloss_oneway", "pathloss_roundtrip",
        "bleu_params", "seed", "solver_tol", "outer_tol", "max_outer_iters", "max_inner_iters",
        "randomization_count", "cu_channel_model", "rician_k_factor", "sensing_covariance",
        "normalize_objective"};
    if (!j.is_object()) throw ConfigError("<root>", "scenario must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError(key, "unknown key");

    for (const char* key : {"n_antennas", "cu_angles", "target_angles", "noise_comm_dbm",
                            "noise_sense_dbm", "power_budget_dbm", "iota", "kappa",
                            "qos_threshold", "bleu_params"})
        if (!j.contains(key)) throw ConfigError(key, "required key is missing");

    ScenarioConfig c;
    c.n_antennas = get_or(j, "n_antennas", c.n_antennas);
    c.spacing_ratio = get_or(j, "spacing_ratio", c.spacing_ratio);
    c.cu_angles = get_or(j, "cu_angles", std::vector<double>{});
    c.target_angles = get_or(j, "target_angles", std::vector<double>{});
    c.noise_comm_dbm = get_or(j, "noise_comm_dbm", c.noise_comm_dbm);
    c.noise_sense_dbm = get_or(j, "noise_sense_dbm", c.noise_sense_dbm);
    if (j.contains("noise_echo_dbm") && !j.at("noise_echo_dbm").is_null())
        c.noise_echo_dbm = get_or(j, "noise_echo_dbm", 0.0);
    c.power_budget_dbm = get_or(j, "power_budget_dbm", c.power_budget_dbm);
    c.iota = get_or(j, "iota", c.iota);
    c.kappa = get_or(j, "kappa", c.kappa);
    c.qos_threshold = get_or(j, "qos_threshold", c.qos_threshold);
    c.f_coeff = get_or(j, "f_coeff", c.f_coeff);
    c.snapshots = get_or(j, "snapshots", c.snapshots);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.solver_tol = get_or(j, "solver_tol", c.solver_tol);
    c.outer_tol = get_or(j, "outer_tol", c.outer_tol);
    c.max_outer_iters = get_or(j, "max_outer_iters", c.max_outer_iters);
    c.max_inner_iters = get_or(j, "max_inner_iters", c.max_inner_iters);
    c.randomization_count = get_or(j, "randomization_count", c.randomization_count);
    c.rician_k_factor = get_or(j, "rician_k_factor", c.rician_k_factor);
    c.normalize_objective = get_or(j, "normalize_objective", c.normalize_objective);

    const auto l = c.target_angles.size();
    c.error_radius = j.contains("error_radius") ? get_or(j, "error_radius", std::vector<double>{})
                                                : std::vector<double>(l, 0.01);
    c.pathloss_oneway = j.contains("pathloss_oneway") ? complex_list(j.at("pathloss_oneway"), "pathloss_oneway")
                                                      : std::vector<cd>(l, cd(0.1, 0.0));
    c.pathloss_roundtrip = j.contains("pathloss_roundtrip")
                               ? complex_list(j.at("pathloss_roundtrip"), "pathloss_roundtrip")
                               : std::vector<cd>(l, cd(0.1, 0.0));

    const auto model = get_or<std::string>(j, "cu_channel_model", "los");
    if (model == "los")
        c.cu_channel_model = CuChannelModel::LineOfSight;
    else if (model == "rician")
        c.cu_channel_model = CuChannelModel::Rician;
    else
        throw ConfigError("cu_channel_model", "expected \"los\" or \"rician\"");

    const auto cov = get_or<std::string>(j, "sensing_covariance", "aggregate");
    if (cov == "aggregate")
        c.sensing_covariance = SensingCovariance::Aggregate;
    else if (cov == "per_target")
        c.sensing_covariance = SensingCovariance::PerTarget;
    else
        throw ConfigError("sensing_covariance", "expected \"aggregate\" or \"per_target\"");

    const auto& bp = j.at("bleu_params");
    if (!bp.is_array()) throw ConfigError("bleu_params", "expected a list with one entry per CU");
    for (const auto& e : bp) {
        BleuParams b;
        try {
            if (e.contains("rho_lower")) b.rho_lower = e.at("rho_lower").get<double>();
            b.global_bound = e.value("global_bound", b.global_bound);
            b.weights = e.value("weights", std::vector<double>{});
            b.precisions = e.value("precisions", std::vector<double>{});
        } catch (const json::exception& ex) {
            throw ConfigError("bleu_params", ex.what());
        }
        c.bleu_params.push_back(std::move(b));
    }

    validate(c);
    return c;
}

json scenario_to_json(const ScenarioConfig& c) {
    auto clist = [](const std::vector<cd>& v) {
        json a = json::array();
        for (const auto& z : v) a.push_back({z.real(), z.imag()});
        return a;
    };
    json bleu = json::array();
    for (const auto& b : c.bleu_params) {
        json e = {{"global_bound", b.global_bound}, {"weights", b.weights}, {"precisions", b.precisions}};
        if (b.rho_lower) e["rho_lower"] = *b.rho_lower;
        bleu.push_back(std::move(e));
    }
    json j = {
        {"n_antennas", c.n_antennas},
        {"spacing_ratio", c.spacing_ratio},
        {"cu_angles", c.cu_angles},
        {"target_angles", c.target_angles},
        {"noise_comm_dbm", c.noise_comm_dbm},
        {"noise_sense_dbm", c.noise_sense_dbm},
        {"power_budget_dbm", c.power_budget_dbm},
        {"iota", c.iota},
        {"kappa", c.kappa},
        {"qos_threshold", c.qos_threshold},
        {"error_radius", c.error_radius},
        {"f_coeff", c.f_coeff},
        {"snapshots", c.snapshots},
        {"pathloss_oneway", clist(c.pathloss_oneway)},
        {"pathloss_roundtrip", clist(c.pathloss_roundtrip)},
        {"bleu_params", bleu},
        {"seed", c.seed},
        {"solver_tol", c.solver_tol},
        {"outer_tol", c.outer_tol},
        {"max_outer_iters", c.max_outer_iters},
        {"max_inner_iters", c.max_inner_iters},
        {"randomization_count", c.randomization_count},
        {"cu_channel_model", c.cu_channel_model == CuChannelModel::Rician ? "rician" : "los"},
        {"rician_k_factor", c.rician_k_factor},
        {"sensing_covariance", c.sensing_covariance == SensingCovariance::PerTarget ? "per_target" : "aggregate"},
        {"normalize_objective", c.normalize_objective},
    };
    if (c.noise_echo_dbm) j["noise_echo_dbm"] = *c.noise_echo_dbm;
    return j;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("parse failure: ") + e.what());
    }
    return scenario_from_json(j);
}

void save_scenario(const ScenarioConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << scenario_to_json(cfg).dump(2) << '\n';
}

ScenarioConfig reference_scenario() {
    ScenarioConfig c;
    c.n_antennas = 20;
    c.spacing_ratio = 0.5;
    c.cu_angles = {-30.0, 20.0};
    c.target_angles = {-35.0, 5.0, 40.0};
    c.noise_comm_dbm = -30.0;
    c.noise_sense_dbm = -30.0;
    c.power_budget_dbm = 20.0;
    c.iota = 1.1;
    c.kappa = 0.5;
    c.qos_threshold = 1.0;
    c.error_radius = {0.01, 0.01, 0.01};
    c.pathloss_oneway = {0.1, 0.1, 0.1};
    c.pathloss_roundtrip = {0.1, 0.1, 0.1};
    BleuParams b1;
    b1.rho_lower = 0.4;
    BleuParams b2;
    b2.rho_lower = 0.33;
    c.bleu_params = {b1, b2};
    return c;
}

ChannelSet synthesize_channels(const ScenarioConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    ChannelSet ch;
    const int n = cfg.n_antennas;
    ch.n_antennas = n;
    ch.spacing_ratio = cfg.spacing_ratio;
    ch.noise_comm_w = dbm_to_watts(cfg.noise_comm_dbm);
    ch.noise_sense_w = dbm_to_watts(cfg.noise_sense_dbm);
    ch.noise_echo_w = dbm_to_watts(cfg.noise_echo_dbm.value_or(cfg.noise_sense_dbm));

    for (int k = 0; k < cfg.num_cus(); ++k) {
        CVec a = sensing::steering_vector(deg_to_rad(cfg.cu_angles[k]), n, cfg.spacing_ratio);
        if (cfg.cu_channel_model == CuChannelModel::Rician) {
            const double kf = cfg.rician_k_factor;
            Rng rng(mix_seed(seed, 0x435553ULL, static_cast<std::uint64_t>(k)));
            a = std::sqrt(kf / (kf + 1.0)) * a + std::sqrt(1.0 / (kf + 1.0)) * rng.complex_normal_vector(n, 1.0);
        }
        ch.cu_channels.push_back(std::move(a));
    }
    for (int l = 0; l < cfg.num_targets(); ++l) {
        const double theta = deg_to_rad(cfg.target_angles[l]);
        ch.target_angles_rad.push_back(theta);
        ch.alpha.push_back(cfg.pathloss_oneway[l]);
        ch.beta.push_back(cfg.pathloss_roundtrip[l]);
        ch.error_radius.push_back(cfg.error_radius[l]);
        ch.target_channels_est.push_back(cfg.pathloss_oneway[l] *
                                         sensing::steering_vector(theta, n, cfg.spacing_ratio));
    }
    return ch;
}

std::string scenario_digest(const ScenarioConfig& cfg, std::uint64_t seed) {
    const std::string text = scenario_to_json(cfg).dump() + "#" + std::to_string(seed);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace iscsc
