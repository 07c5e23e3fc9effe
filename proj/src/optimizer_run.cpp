// SPDX-License-Identifier: Apache-2.0
#include "iscsc/optimizer.hpp"
#include "iscsc/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>

namespace iscsc::opt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double power_used(const Design& d, const IterateState& s) {
    double cs = 0.0;
    for (const auto& w : s.w_mats) cs += w.trace().real();
    for (const auto& r : s.r_mats) cs += r.trace().real();
    return semantics::computational_power(s.rho, d.cfg->f_coeff) + cs;
}

double qos_slack(const Design& d, const IterateState& s) {
    double slack = std::numeric_limits<double>::infinity();
    for (int k = 0; k < d.k(); ++k) {
        const RateTerms t = rate_terms(d, s, k);
        slack = std::min(slack, d.iota / s.rho[k] * std::log2(t.a / t.b) - d.cfg->qos_threshold);
    }
    return slack;
}

void refresh_anchors(const Design& d, IterateState& s) {
    s.b_anchor.assign(d.k(), 0.0);
    s.c_anchor.assign(d.k(), 1.0);
    for (int k = 0; k < d.k(); ++k) {
        s.b_anchor[k] = rate_terms(d, s, k).b;
        s.c_anchor[k] = 1.0 + s.lambda[k];
    }
    const CMat rx = s.transmit_covariance(d.n());
    s.u_caps.assign(d.l(), 0.0);
    for (int l = 0; l < d.l(); ++l) s.u_caps[l] = 1.0 / sensing::crb_theta(d.fims[l].evaluate(rx));
}

TraceRecord record(const Design& d, const IterateState& s, int outer, const char* step) {
    TraceRecord r;
    r.outer = outer;
    r.step = step;
    r.objective = s.objective_value;
    r.power_slack_w = d.budget_w - power_used(d, s);
    r.qos_slack = qos_slack(d, s);
    return r;
}

double max_change(const std::vector<CMat>& a, const std::vector<CMat>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).norm());
    return m;
}

}  // namespace

IterateState initial_state(const Design& d) {
    const auto& ch = *d.channels;
    const int n = d.n();
    const int sensing_mats = d.l();
    const double p = 0.8 * d.budget_w / (d.k() + sensing_mats);
    IterateState s;
    for (int k = 0; k < d.k(); ++k) {
        const CVec& h = ch.cu_channels[k];
        s.w_mats.push_back(p * h * h.adjoint() / h.squaredNorm());
    }
    if (d.sensing_vars() == 1 && d.aggregate_sensing)
        s.r_mats.push_back((p * sensing_mats / n) * CMat::Identity(n, n));
    else
        for (int l = 0; l < d.sensing_vars(); ++l) s.r_mats.push_back((p / n) * CMat::Identity(n, n));
    s.rho.assign(d.k(), 1.0);
    s.t_aux = RMat::Zero(d.k(), d.l());
    s.lambda = update_lambda(d, s);
    if (d.mode == Mode::Full) {
        try {
            s.rho = update_rho(d, s);
        } catch (const InfeasibleError&) {
            // keep rho = 1; the first Step 1 decides feasibility
        }
    }
    refresh_anchors(d, s);
    s.objective_value = objective(d, s);
    return s;
}

RunResult run_algorithm1(const ScenarioConfig& cfg, const ChannelSet& channels, Mode mode, const RunOptions& options) {
    validate(cfg);
    const auto t_start = Clock::now();
    Design d = make_design(cfg, channels, mode);
    const double tol = options.solver_tol.value_or(cfg.solver_tol);
    const double rho_tol = 1e-4;  // Frobenius threshold for the inner SCA loop

    RunResult result;
    auto& rep = result.report;
    rep.mode = mode;

    IterateState s = initial_state(d);
    if (cfg.normalize_objective) {
        double rate = 0.0;
        for (int k = 0; k < d.k(); ++k) {
            const RateTerms t = rate_terms(d, s, k);
            rate += d.iota / s.rho[k] * (std::log2(t.a / t.b) - std::log2(1.0 + s.lambda[k]));
        }
        double crb = 0.0;
        for (int l = 0; l < d.l(); ++l) crb += 1.0 / s.u_caps[l];
        d.rate_scale = std::abs(rate) > 0.0 ? std::abs(rate) : 1.0;
        d.crb_scale = crb > 0.0 ? crb : 1.0;
        s.objective_value = objective(d, s);
    }
    rep.trace.push_back(record(d, s, 0, "init"));
    if (options.verbose) std::cerr << "[alg1] " << to_string(mode) << " init objective " << s.objective_value << "\n";

    bool failed = false;
    for (int outer = 1; outer <= cfg.max_outer_iters && !failed; ++outer) {
        const double prev = s.objective_value;
        rep.outer_iterations = outer;

        // Step 1: SCA over the beams with rho and lambda fixed
        auto t0 = Clock::now();
        int inner = 0;
        int newton = 0;
        std::string status = "optimal";
        for (; inner < cfg.max_inner_iters; ++inner) {
            Step1Problem prob = build_step1(d, s);
            const sdp::SolveOutcome o = sdp::solve(prob.problem, tol);
            ++rep.sdp_solves;
            newton += o.iterations;
            rep.newton_steps += o.iterations;
            if (!o.optimal()) {
                status = sdp::to_string(o.status);
                if (rep.sdp_solves == 1) {
                    rep.status = o.status == sdp::SolveStatus::Infeasible ? RunStatus::Infeasible
                                                                          : RunStatus::NumericalLimit;
                    rep.message = "first Step 1 problem: " + status + " (" + o.diagnostics + ")";
                    failed = true;
                } else {
                    rep.message = "Step 1 stopped early: " + status + " (" + o.diagnostics + ")";
                }
                break;
            }
            IterateState next = read_step1(d, prob, o, s);
            refresh_anchors(d, next);
            next.objective_value = objective(d, next);
            if (next.objective_value < s.objective_value - 1e-7 * std::max(1.0, std::abs(s.objective_value))) {
                // an inaccurate solve; keep the certified iterate
                rep.message = "Step 1 rejected a non-improving solve";
                break;
            }
            const double dw = max_change(next.w_mats, s.w_mats);
            const double dr = max_change(next.r_mats, s.r_mats);
            s = std::move(next);
            if (options.verbose)
                std::cerr << "[alg1] outer " << outer << " inner " << inner << " objective " << s.objective_value
                          << " dW " << dw << " dR " << dr << " newton " << o.iterations << " (" << o.wall_seconds
                          << " s)\n";
            if (dw <= rho_tol && dr <= rho_tol) {
                ++inner;
                break;
            }
        }
        if (failed) break;
        auto r1 = record(d, s, outer, "step1");
        r1.inner_iters = inner;
        r1.solver_iterations = newton;
        r1.solver_status = status;
        r1.seconds = seconds_since(t0);
        rep.trace.push_back(r1);

        // Step 2: certified worst-case eavesdropper SINR
        t0 = Clock::now();
        s.lambda = update_lambda(d, s);
        refresh_anchors(d, s);
        s.objective_value = objective(d, s);
        auto r2 = record(d, s, outer, "step2");
        r2.seconds = seconds_since(t0);
        rep.trace.push_back(r2);

        // Step 3: extraction ratios
        if (d.mode == Mode::Full) {
            t0 = Clock::now();
            try {
                const auto rho = update_rho(d, s);
                IterateState next = s;
                next.rho = rho;
                next.objective_value = objective(d, next);
                if (next.objective_value >= s.objective_value - 1e-12 * std::max(1.0, std::abs(s.objective_value)))
                    s = std::move(next);
            } catch (const InfeasibleError& e) {
                rep.message = std::string("Step 3 kept the previous ratios: ") + e.what();
            }
            refresh_anchors(d, s);
            auto r3 = record(d, s, outer, "step3");
            r3.seconds = seconds_since(t0);
            rep.trace.push_back(r3);
        }
        if (options.verbose)
            std::cerr << "[alg1] outer " << outer << " objective " << s.objective_value << " rho";
        if (options.verbose) {
            for (double r : s.rho) std::cerr << ' ' << r;
            std::cerr << "\n";
        }
        if (std::abs(s.objective_value - prev) <= cfg.outer_tol) {
            rep.converged = true;
            break;
        }
    }

    auto& sol = result.solution;
    sol.w_sdr = s.w_mats;
    sol.rho = s.rho;
    sol.lambda_sdr = s.lambda;
    sol.u_caps = s.u_caps;
    sol.t_aux = s.t_aux;
    const int l_count = d.l();
    if (d.aggregate_sensing && l_count > 0) {
        for (int l = 0; l < l_count; ++l) sol.r_mats.push_back(s.r_mats[0] / static_cast<double>(l_count));
    } else {
        sol.r_mats = s.r_mats;
    }
    sol.sdr_metrics = evaluate_metrics(d, s.w_mats, s.r_mats, s.rho, s.lambda);
    sol.sdr_objective = sol.sdr_metrics.objective;

    // Step 4: rank-one recovery
    const CMat r_sum = s.sensing_sum(d.n());
    const auto& ch = channels;
    auto certified = [&](const std::vector<CMat>& w) {
        std::vector<double> lambda(d.k(), 0.0);
        for (int k = 0; k < d.k(); ++k)
            for (int l = 0; l < d.l(); ++l)
                lambda[k] = std::max(lambda[k], certify_lambda(w[k], r_sum, ch.target_channels_est[l],
                                                               ch.error_radius[l], ch.noise_sense_w)
                                                    .lambda);
        return lambda;
    };
    auto to_mats = [](const std::vector<CVec>& v) {
        std::vector<CMat> w;
        for (const auto& x : v) w.push_back(x * x.adjoint());
        return w;
    };
    const CandidateScore score = [&](const std::vector<CVec>& v) -> std::optional<double> {
        IterateState c = s;
        c.w_mats = to_mats(v);
        c.lambda = certified(c.w_mats);
        if (power_used(d, c) > d.budget_w + 1e-9) return std::nullopt;
        if (cfg.qos_threshold > 0.0 && qos_slack(d, c) < -1e-9) return std::nullopt;
        try {
            return objective(d, c);
        } catch (const NumericalError&) {
            return std::nullopt;
        }
    };
    const auto rr = gaussian_randomization(s.w_mats, cfg.randomization_count, score,
                                           mix_seed(cfg.seed, 0x52414e44, static_cast<int>(mode)));
    sol.beams = rr.vectors;
    sol.randomized_from_samples = rr.from_samples;
    const auto w_rank1 = to_mats(sol.beams);
    sol.lambda = certified(w_rank1);
    sol.metrics = evaluate_metrics(d, w_rank1, s.r_mats, s.rho, sol.lambda);
    sol.randomized_objective = sol.metrics.objective;
    sol.sdr_gap = (sol.sdr_objective - sol.randomized_objective) / std::max(1e-12, std::abs(sol.sdr_objective));
    for (int k = 0; k < d.k(); ++k) {
        const double nw = s.w_mats[k].norm();
        sol.rank_one_residual.push_back(nw > 0.0 ? (w_rank1[k] - s.w_mats[k]).norm() / nw : 0.0);
    }
    if (!rr.feasible && rep.status == RunStatus::Optimal)
        rep.message += (rep.message.empty() ? "" : "; ") + std::string("no rank-one candidate met every constraint");

    rep.wall_seconds = seconds_since(t_start);
    return result;
}

RunResult run_benchmark(const ScenarioConfig& cfg, const ChannelSet& channels, Mode mode, const RunOptions& options) {
    return run_algorithm1(cfg, channels, mode, options);
}

}  // namespace iscsc::opt
