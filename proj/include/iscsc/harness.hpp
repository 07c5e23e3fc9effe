// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "iscsc/optimizer.hpp"
#include "iscsc/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace iscsc::harness {

enum class ExitCode : int { Ok = 0, Infeasible = 2, NumericalLimit = 3, Usage = 4, Io = 5 };

ExitCode exit_code(opt::RunStatus s);

/// Bad command-line input (exit code 4).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Unreadable or unwritable file or directory (exit code 5).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tolerance override from ISCSC_SOLVER_TOL, if set. Throws UsageError if malformed.
std::optional<double> solver_tol_from_env();

// ---- reports ---------------------------------------------------------------

/// Report document, schema "iscsc.report/1":
///   digest, seed, mode, status, message, config,
///   cus[]     {sinr, semantic_rate, ssr, rho, lambda},
///   targets[] {crb, rcrb, lambda_margin},
///   power     {comp_w, cs_w, budget_w},
///   totals    {sum_semantic_rate, sum_ssr, sum_rcrb, objective, sdr_objective, sdr_gap},
///   solver    {outer_iterations, sdp_solves, newton_steps, converged, wall_seconds},
///   trace[]   {outer, step, objective, inner_iters, solver_iterations, solver_status,
///              power_slack_w, qos_slack, seconds},
///   solution  {beams[k][n] as [re, im], r_mats[l][n][n] as [re, im], rho[], lambda[]}.
nlohmann::json make_report(const ScenarioConfig& cfg, std::uint64_t seed, const opt::RunResult& result);

struct Verification {
    bool ok = true;
    double worst_error = 0.0;  // max |stored - recomputed| / max(1, |stored|)
    std::string worst_field;
    bool digest_ok = true;
};

/// Rebuilds the channels from the stored config and seed, recomputes every
/// metric from the stored beams, sensing matrices and ratios, and compares.
Verification verify_report(const nlohmann::json& report, double tol = 1e-8);

nlohmann::json read_json(const std::filesystem::path& path);
/// Writes through a temporary file and a rename. Throws IoError.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

/// Creates `dir` if needed and checks that it is writable. Throws IoError.
void ensure_writable_dir(const std::filesystem::path& dir);

struct SolveOutput {
    opt::RunResult result;
    nlohmann::json report;
};

/// Solves one scenario and writes report.json into `out_dir`.
SolveOutput cmd_solve(const ScenarioConfig& cfg, opt::Mode mode, std::uint64_t seed,
                      const std::filesystem::path& out_dir, const opt::RunOptions& options = {});

// ---- sweeps ----------------------------------------------------------------

struct SweepRow {
    double power_dbm = 0.0;
    opt::Mode mode = opt::Mode::Full;
    std::uint64_t seed = 0;
    double sum_semantic_rate = 0.0;
    double sum_ssr = 0.0;
    double sum_rcrb = 0.0;
    double p_comp_w = 0.0;
    double p_cs_w = 0.0;
    int iters = 0;
    std::string status;
};

/// Rows sorted by (mode, power, seed) without duplicate keys.
class SweepTable {
public:
    static constexpr const char* kHeader =
        "power_dbm,mode,seed,sum_semantic_rate,sum_ssr,sum_rcrb,p_comp_w,p_cs_w,iters,status";

    /// Inserts or, with `replace`, overwrites the row with the same key.
    /// Returns false when the key exists and `replace` is false.
    bool upsert(const SweepRow& row, bool replace);
    const SweepRow* find(double power_dbm, opt::Mode mode, std::uint64_t seed) const;
    const std::vector<SweepRow>& rows() const { return rows_; }

    std::string to_csv() const;
    static SweepTable from_csv(const std::string& text);
    static SweepTable load(const std::filesystem::path& path);  // empty if the file is absent
    void save(const std::filesystem::path& path) const;

private:
    std::vector<SweepRow> rows_;
};

struct SweepOptions {
    std::vector<double> powers_dbm{15, 20, 25, 30, 35};
    std::vector<opt::Mode> modes{opt::Mode::Full, opt::Mode::RhoFixed1};
    std::vector<std::uint64_t> seeds{0};
    bool force = false;
    int jobs = 1;
    bool write_reports = true;  // reports/<mode>_<power>_<seed>.json next to the table
    opt::RunOptions run;
    std::function<void(const SweepRow&)> on_row;  // called under the write lock
};

/// Runs every (power, mode, seed) key not already in `out_dir`/sweep.csv (all
/// keys with `force`). Rows are merged into the table as they finish; a failed
/// row records its error in `status` and the sweep continues. Also writes
/// fig_rate.csv, fig_ssr.csv and fig_rcrb.csv (power_dbm, then one mean column per mode).
SweepTable cmd_sweep(const ScenarioConfig& base, const SweepOptions& options, const std::filesystem::path& out_dir);

/// Sum over the stored rows is averaged over seeds per (mode, power).
void write_plot_data(const SweepTable& table, const std::filesystem::path& out_dir);

/// Line plots of the three figure files as SVG (fig_rate.svg, ...).
void write_plots(const SweepTable& table, const std::filesystem::path& out_dir);

// ---- MSE versus CRB ----------------------------------------------------------

/// Monte Carlo angle estimation for the first target of `cfg` (or the default
/// setup without targets). Writes mse_crb.csv (snr_db,mse,crb,ratio,trials).
/// Throws UsageError for fewer than 100 trials or an empty SNR list.
std::vector<sensing::MseCrbRow> cmd_mse_crb(const ScenarioConfig& cfg, const std::vector<double>& snr_db,
                                            int trials, const std::filesystem::path& out_dir);

/// The reference scenario shrunk to N = 8 with targets at -35 and 40 degrees.
ScenarioConfig fast_scenario();

// ---- validation --------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct ValidateOptions {
    std::uint64_t seed = 1;
    /// Mutation hook: added to the BLEU bound denominator before the inversion check.
    double bleu_denominator_shift = 0.0;
    /// Also solve a small instance and sample its robust constraints.
    bool include_solve = true;
};

/// Runs every oracle check; never throws for a failing check.
std::vector<CheckResult> cmd_validate(const ValidateOptions& options);

/// One-off checks, also used by the acceptance suite.
CheckResult check_bleu_inversion(std::uint64_t seed, int cases, double denominator_shift = 0.0);
CheckResult check_fim_finite_difference(std::uint64_t seed, int cases);
CheckResult check_crb_lmi(std::uint64_t seed, int n_antennas);
CheckResult check_sprocedure_sampling(std::uint64_t seed, int samples);
CheckResult check_embedding(std::uint64_t seed);

/// Samples `samples` error vectors per (k, l) in the uncertainty ball and
/// returns the largest Gamma_{l|k} - lambda_k found.
double robust_violation(const ChannelSet& channels, const opt::BeamformingSolution& sol, int samples,
                        std::uint64_t seed);

}  // namespace iscsc::harness
