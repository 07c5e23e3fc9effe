// SPDX-License-Identifier: Apache-2.0
#include "iscsc/harness.hpp"
#include "iscsc/optimizer.hpp"
#include "iscsc/scenario.hpp"
#include "iscsc/semantics.hpp"
#include "iscsc/sensing.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace pybind11::literals;
using namespace iscsc;

namespace {

// JSON crosses the boundary as text; the Python side wraps these with json.loads/dumps.
ScenarioConfig config_from_text(const std::string& text) {
    return text.empty() ? reference_scenario() : scenario_from_json(nlohmann::json::parse(text));
}

std::string solve_text(const std::string& config, const std::string& mode, std::uint64_t seed,
                       std::optional<double> tol) {
    ScenarioConfig cfg = config_from_text(config);
    cfg.seed = seed;
    const ChannelSet ch = synthesize_channels(cfg, seed);
    opt::RunOptions o;
    o.solver_tol = tol;
    opt::RunResult r;
    {
        py::gil_scoped_release release;
        r = opt::run_algorithm1(cfg, ch, opt::parse_mode(mode), o);
    }
    return harness::make_report(cfg, seed, r).dump();
}

py::dict verify_text(const std::string& report, double tol) {
    const auto v = harness::verify_report(nlohmann::json::parse(report), tol);
    return py::dict("ok"_a = v.ok, "worst_error"_a = v.worst_error, "worst_field"_a = v.worst_field,
                    "digest_ok"_a = v.digest_ok);
}

py::list validate_checks(std::uint64_t seed, bool include_solve) {
    harness::ValidateOptions o;
    o.seed = seed;
    o.include_solve = include_solve;
    std::vector<harness::CheckResult> checks;
    {
        py::gil_scoped_release release;
        checks = harness::cmd_validate(o);
    }
    py::list out;
    for (const auto& c : checks)
        out.append(py::dict("name"_a = c.name, "passed"_a = c.passed, "detail"_a = c.detail,
                            "seconds"_a = c.seconds));
    return out;
}

py::list mse_crb(const std::vector<double>& snr_db, int trials, int n_antennas, double theta_rad,
                 std::complex<double> beta, int snapshots, std::uint64_t seed) {
    sensing::MseCrbSetup s;
    s.n_antennas = n_antennas;
    s.theta_rad = theta_rad;
    s.beta = beta;
    s.snapshots = snapshots;
    s.seed = seed;
    const auto rows = sensing::mse_vs_crb(s, snr_db, trials);
    py::list out;
    for (const auto& r : rows)
        out.append(py::dict("snr_db"_a = r.snr_db, "mse"_a = r.mse, "crb"_a = r.crb, "trials"_a = r.trials));
    return out;
}

}  // namespace

PYBIND11_MODULE(_iscsc, m) {
    m.doc() = "Robust semantic ISAC beamforming";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    m.def("reference_scenario_json", [] { return scenario_to_json(reference_scenario()).dump(); });
    m.def("fast_scenario_json", [] { return scenario_to_json(harness::fast_scenario()).dump(); });
    m.def("normalize_scenario_json",
          [](const std::string& text) { return scenario_to_json(config_from_text(text)).dump(); },
          "text"_a);
    m.def("scenario_digest", [](const std::string& text, std::uint64_t seed) {
        return scenario_digest(config_from_text(text), seed);
    }, "config"_a, "seed"_a);

    m.def("dbm_to_watts", &dbm_to_watts, "p_dbm"_a);
    m.def("watts_to_dbm", &watts_to_dbm, "p_w"_a);

    m.def("steering_vector", &sensing::steering_vector, "theta_rad"_a, "n"_a, "spacing_ratio"_a = 0.5);
    m.def("crb_theta",
          [](double theta, std::complex<double> beta, const CMat& rx, int snapshots, double noise_w) {
              return sensing::crb_theta(sensing::fim(theta, beta, rx, snapshots, noise_w));
          },
          "theta_rad"_a, "beta"_a, "rx"_a, "snapshots"_a, "noise_w"_a);

    m.def("bleu_oracle",
          [](double rho, const std::vector<double>& w, const std::vector<double>& p) {
              return semantics::bleu_oracle(rho, w, p);
          },
          "rho"_a, "weights"_a, "precisions"_a);
    m.def("rho_lower_bound",
          [](double q, const std::vector<double>& w, const std::vector<double>& p) {
              return semantics::rho_lower_bound(q, w, p);
          },
          "global_bound"_a, "weights"_a, "precisions"_a);
    m.def("computational_power",
          [](const std::vector<double>& rho, double f) { return semantics::computational_power(rho, f); },
          "rhos"_a, "f_coeff"_a);

    m.def("solve_json", &solve_text, "config"_a, "mode"_a = "full", "seed"_a = 0, "solver_tol"_a = py::none());
    m.def("verify_report_json", &verify_text, "report"_a, "tol"_a = 1e-8);
    m.def("validate", &validate_checks, "seed"_a = 1, "include_solve"_a = true);
    m.def("mse_crb", &mse_crb, "snr_db"_a, "trials"_a = 1000, "n_antennas"_a = 8, "theta_rad"_a = 0.3,
          "beta"_a = std::complex<double>(0.1, 0.0), "snapshots"_a = 64, "seed"_a = 1);
}
