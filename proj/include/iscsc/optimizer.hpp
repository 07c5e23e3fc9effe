// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "iscsc/scenario.hpp"
#include "iscsc/sdp/model.hpp"
#include "iscsc/semantics.hpp"
#include "iscsc/sensing.hpp"
#include "iscsc/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace iscsc::opt {

enum class Mode { Full, RhoFixed1, Conventional };

/// Accepts full, rho1 / rho-fixed-1, conventional / conventional-isac.
Mode parse_mode(const std::string& s);
const char* to_string(Mode m);

/// Everything the steps need that stays fixed during a run.
struct Design {
    const ScenarioConfig* cfg = nullptr;
    const ChannelSet* channels = nullptr;
    Mode mode = Mode::Full;
    double iota = 1.0;
    double kappa_rate = 0.5;
    double kappa_crb = 0.5;
    double rate_scale = 1.0;  // objective parts are divided by these
    double crb_scale = 1.0;
    double budget_w = 0.0;
    std::vector<double> rho_lower;
    std::vector<sensing::FimFunctionals> fims;
    bool aggregate_sensing = true;

    int n() const { return channels->n_antennas; }
    int k() const { return channels->num_cus(); }
    int l() const { return channels->num_targets(); }
    /// Number of sensing covariance variables (1 when aggregated, L otherwise; 0 without targets).
    int sensing_vars() const;
};

Design make_design(const ScenarioConfig& cfg, const ChannelSet& channels, Mode mode);

struct IterateState {
    std::vector<CMat> w_mats;
    std::vector<CMat> r_mats;  // one per sensing variable
    std::vector<double> rho;
    std::vector<double> lambda;
    RMat t_aux;                 // K x L
    std::vector<double> u_caps;
    std::vector<double> b_anchor;
    std::vector<double> c_anchor;
    double objective_value = 0.0;

    CMat sensing_sum(int n) const;
    CMat transmit_covariance(int n) const;
};

/// Components of the per-CU rate: A_k total received power, B_k interference plus noise.
struct RateTerms {
    double a = 0.0;
    double b = 0.0;
};
RateTerms rate_terms(const Design& d, const IterateState& s, int k);

/// Outer objective: kappa (iota/rho)(log2(1+gamma) - log2(1+lambda)) summed,
/// minus kappa sum CRB, each part divided by its scale.
double objective(const Design& d, const IterateState& s);

/// (iota/rho)[ln(A)/ln2 - log2(Bi) - (B - Bi)/(Bi ln2)] with `log_a` standing
/// for ln(A) (a hypograph variable inside the SDP).
sdp::AffineExpr taylor_rate_bound(const sdp::AffineExpr& log_a, const sdp::AffineExpr& b_expr, double b_anchor,
                                  double rho, double iota);
/// Numeric value of the same bound.
double taylor_rate_value(double a, double b, double b_anchor, double rho, double iota);

/// -(iota/rho)[log2(Ci) + (C - Ci)/(Ci ln2)] with C = 1 + lambda.
sdp::AffineExpr taylor_lambda_bound(const sdp::AffineExpr& lambda, double c_anchor, double rho, double iota);
double taylor_lambda_value(double lambda, double c_anchor, double rho, double iota);

/// Robust eavesdropper block for pair (k, l) with lambda fixed:
/// [[t I - E, -E h], [-h^H E, -t eps^2 - h^H E h + lambda sigma^2]], E = W - lambda sum R.
sdp::ComplexLmi sprocedure_lmi(const sdp::HermitianVar& w, const std::vector<sdp::HermitianVar>& r_vars,
                               double lambda, const sdp::AffineExpr& t, const CVec& h_est, double eps,
                               double noise_w);

/// [[J_tt - U, J_tb], [J_tb^T, J_bb I]] with every entry affine in the transmit covariance.
sdp::RealLmi crb_lmi(const std::vector<sdp::HermitianVar>& rx_terms, const sdp::AffineExpr& u,
                     const sensing::FimFunctionals& f);

/// Handles into a Step 1 problem.
struct Step1Vars {
    std::vector<sdp::HermitianVar> w;
    std::vector<sdp::HermitianVar> r;
    std::vector<sdp::ScalarVar> log_a;
    std::vector<std::vector<std::optional<sdp::ScalarVar>>> t;  // [k][l], empty when eps_l = 0
    std::vector<sdp::ScalarVar> u;
    std::vector<sdp::ScalarVar> v;
    std::vector<double> crb_unit;  // U = u / crb_unit, CRB bound = crb_unit * v
};

struct Step1Problem {
    sdp::SdpProblem problem;
    Step1Vars vars;
};

Step1Problem build_step1(const Design& d, const IterateState& anchor);

/// Reads a solved Step 1 problem into a new state (rho, lambda carried over).
IterateState read_step1(const Design& d, const Step1Problem& p, const sdp::SolveOutcome& o,
                        const IterateState& anchor);

/// Certified worst case of Gamma_{l|k} over ||u|| <= eps for fixed W_k and sum R,
/// with the S-procedure multiplier t attaining it. Exact (closed form) for eps = 0.
struct LambdaCertificate {
    double lambda = 0.0;
    double t = 0.0;
};
LambdaCertificate certify_lambda(const CMat& w, const CMat& r_sum, const CVec& h_est, double eps, double noise_w);

/// True iff some t >= 0 makes the robust block PSD (slack >= -tol), and the best such t.
bool sprocedure_feasible(const CMat& w, const CMat& r_sum, const CVec& h_est, double eps, double noise_w,
                         double lambda, double* t_best = nullptr, double tol = 0.0);

/// Per CU, max over targets of the certified lambda; also fills t_aux.
std::vector<double> update_lambda(const Design& d, IterateState& s);

/// Bounds of rho_k: [rho_lb, min(1, rho_qos)].
struct RhoBounds {
    std::vector<double> lower;
    std::vector<double> upper;
};
RhoBounds rho_bounds(const Design& d, const IterateState& s);

/// Maximizes sum c_k / rho_k over the bounds and the compute-power budget.
/// Throws InfeasibleError when a bound interval is empty or the budget cannot be met.
std::vector<double> maximize_rho(std::span<const double> c, const RhoBounds& bounds, double f_coeff,
                                 double power_left);
std::vector<double> update_rho(const Design& d, const IterateState& s);

/// Feasibility and value of a rank-one candidate; returns nullopt when infeasible.
using CandidateScore = std::function<std::optional<double>(const std::vector<CVec>&)>;

struct RandomizationResult {
    std::vector<CVec> vectors;
    double objective = 0.0;
    bool feasible = false;      // some candidate passed `score`
    bool from_samples = false;  // false: principal eigenvectors won or were the fallback
    int feasible_samples = 0;
};

/// Draws `count` CN(0, W_k) vectors per CU, rescales each to tr(W_k), keeps
/// the best candidate accepted by `score`. The principal eigenvectors compete
/// as an extra candidate and are the fallback.
RandomizationResult gaussian_randomization(std::span<const CMat> w_sdr, int count, const CandidateScore& score,
                                           std::uint64_t seed);

struct TraceRecord {
    int outer = 0;
    std::string step;  // init, step1, step2, step3
    double objective = 0.0;
    int inner_iters = 0;
    int solver_iterations = 0;
    std::string solver_status;
    double power_slack_w = 0.0;
    double qos_slack = 0.0;
    double seconds = 0.0;
};

struct Metrics {
    std::vector<double> sinr;
    std::vector<double> semantic_rate;
    std::vector<double> ssr;
    std::vector<double> rho;
    std::vector<double> lambda;
    std::vector<double> crb;
    std::vector<double> rcrb;
    std::vector<double> lambda_margin;  // per target: min_k (lambda_k - Gamma_{l|k} at the estimate)
    semantics::PowerBreakdown power;
    double sum_semantic_rate = 0.0;
    double sum_ssr = 0.0;
    double sum_rcrb = 0.0;
    double objective = 0.0;
};

/// Metrics of covariance matrices W (K), sensing matrices, rho and lambda.
Metrics evaluate_metrics(const Design& d, std::span<const CMat> w_mats, std::span<const CMat> r_mats,
                         std::span<const double> rho, std::span<const double> lambda);

struct BeamformingSolution {
    std::vector<CVec> beams;
    std::vector<CMat> w_sdr;
    std::vector<CMat> r_mats;  // per target (aggregate split evenly)
    std::vector<double> rho;
    std::vector<double> lambda;
    std::vector<double> lambda_sdr;
    std::vector<double> u_caps;
    RMat t_aux;
    Metrics metrics;      // rank-one solution
    Metrics sdr_metrics;  // relaxed solution
    double sdr_objective = 0.0;
    double randomized_objective = 0.0;
    double sdr_gap = 0.0;  // (sdr - randomized) / max(1, |sdr|)
    std::vector<double> rank_one_residual;
    bool randomized_from_samples = false;
};

enum class RunStatus { Optimal, Infeasible, NumericalLimit };
const char* to_string(RunStatus s);

struct RunReport {
    Mode mode = Mode::Full;
    RunStatus status = RunStatus::Optimal;
    std::string message;
    std::vector<TraceRecord> trace;
    int outer_iterations = 0;
    int sdp_solves = 0;
    int newton_steps = 0;
    double wall_seconds = 0.0;
    bool converged = false;
};

struct RunResult {
    BeamformingSolution solution;
    RunReport report;
};

struct RunOptions {
    bool verbose = false;
    std::optional<double> solver_tol;  // overrides cfg.solver_tol
};

RunResult run_algorithm1(const ScenarioConfig& cfg, const ChannelSet& channels, Mode mode = Mode::Full,
                         const RunOptions& options = {});
RunResult run_benchmark(const ScenarioConfig& cfg, const ChannelSet& channels, Mode mode,
                        const RunOptions& options = {});

/// The initial iterate: matched beams, isotropic sensing, rho from Step 3, lambda certified.
IterateState initial_state(const Design& d);

}  // namespace iscsc::opt
