// SPDX-License-Identifier: Apache-2.0
// Oracle checks behind `iscsc validate`. Each check builds its reference value
// independently of the code path it tests.
#include "iscsc/harness.hpp"

#include "iscsc/rng.hpp"
#include "iscsc/sdp/embed.hpp"
#include "iscsc/sdp/model.hpp"
#include "iscsc/semantics.hpp"
#include "iscsc/sensing.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <sstream>

namespace iscsc::harness {

namespace {

using Clock = std::chrono::steady_clock;

template <typename Body>
CheckResult timed(std::string name, Body body) {
    CheckResult r;
    r.name = std::move(name);
    const auto t0 = Clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

CMat random_psd(Rng& rng, int n, int rank, double scale) {
    CMat g(n, rank);
    for (int j = 0; j < rank; ++j) g.col(j) = rng.complex_normal_vector(n, 1.0);
    return (scale / rank) * g * g.adjoint();
}

CMat random_hermitian(Rng& rng, int n) {
    CMat g(n, n);
    for (int j = 0; j < n; ++j) g.col(j) = rng.complex_normal_vector(n, 1.0);
    return 0.5 * (g + g.adjoint());
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

/// Stacked echo means beta a a^H x_t for all snapshots.
CVec echo_mean(double theta, cd beta, const CMat& x, double spacing) {
    const int n = static_cast<int>(x.rows());
    const CVec a = sensing::steering_vector(theta, n, spacing);
    CVec out(x.size());
    for (Eigen::Index t = 0; t < x.cols(); ++t)
        out.segment(t * n, n) = beta * a * (a.adjoint() * x.col(t))(0);
    return out;
}

}  // namespace

CheckResult check_bleu_inversion(std::uint64_t seed, int cases, double denominator_shift) {
    return timed("bleu-inversion", [&](CheckResult& r) {
        Rng rng(mix_seed(seed, 0x424c4555));
        double worst = 0.0;
        int not_tight = 0;
        for (int c = 0; c < cases; ++c) {
            const int grams = 1 + static_cast<int>(rng.uniform() * 4.0) % 4;
            std::vector<double> w(grams), p(grams);
            double wsum = 0.0;
            for (int g = 0; g < grams; ++g) {
                w[g] = uniform(rng, 0.1, 1.0);
                wsum += w[g];
                p[g] = uniform(rng, 0.3, 1.0);
            }
            for (auto& x : w) x /= wsum;
            const double q = semantics::bleu_oracle(1.0, w, p) * uniform(rng, 0.02, 0.99);
            double rho = semantics::rho_lower_bound(q, w, p);
            if (denominator_shift != 0.0) rho = 1.0 / (1.0 / rho + denominator_shift);
            worst = std::max(worst, std::abs(semantics::bleu_oracle(rho, w, p) - q));
            if (rho - 1e-4 > 0.0 && !(semantics::bleu_oracle(rho - 1e-4, w, p) < q)) ++not_tight;
        }
        r.passed = worst <= 1e-9 && not_tight == 0;
        r.detail = std::to_string(cases) + " cases, max |BLEU(rho_lb) - Q| = " + fmt(worst) + ", " +
                   std::to_string(not_tight) + " bounds not tight";
    });
}

CheckResult check_fim_finite_difference(std::uint64_t seed, int cases) {
    return timed("fim-finite-difference", [&](CheckResult& r) {
        Rng rng(mix_seed(seed, 0x46494d));
        double worst = 0.0;
        for (int c = 0; c < cases; ++c) {
            const int n = 2 + c % 7;
            const double spacing = 0.5;
            const double theta = uniform(rng, -1.2, 1.2);
            const cd beta = rng.complex_normal(1.0);
            const double noise = uniform(rng, 0.01, 1.0);
            const CMat rx = random_psd(rng, n, 1 + c % n, uniform(rng, 0.5, 2.0));

            // n snapshots whose sample covariance is exactly rx
            Eigen::SelfAdjointEigenSolver<CMat> es(rx);
            const CMat root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                              es.eigenvectors().adjoint();
            const CMat x = std::sqrt(static_cast<double>(n)) * root;

            const double h = 1e-6;
            std::array<CVec, 3> d;
            d[0] = (echo_mean(theta + h, beta, x, spacing) - echo_mean(theta - h, beta, x, spacing)) / (2 * h);
            d[1] = (echo_mean(theta, beta + h, x, spacing) - echo_mean(theta, beta - h, x, spacing)) / (2 * h);
            d[2] = (echo_mean(theta, beta + cd(0, h), x, spacing) - echo_mean(theta, beta - cd(0, h), x, spacing)) /
                   (2 * h);
            Eigen::Matrix3d fd;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) fd(i, j) = 2.0 / noise * d[i].dot(d[j]).real();

            const Eigen::Matrix3d j = sensing::fim(theta, beta, rx, n, noise, spacing).assembled();
            worst = std::max(worst, (j - fd).norm() / fd.norm());
        }
        r.passed = worst < 1e-4;
        r.detail = std::to_string(cases) + " cases, max relative error " + fmt(worst);
    });
}

CheckResult check_crb_lmi(std::uint64_t seed, int n_antennas) {
    return timed("crb-lmi-n" + std::to_string(n_antennas), [&](CheckResult& r) {
        Rng rng(mix_seed(seed, 0x43524200, static_cast<std::uint64_t>(n_antennas)));
        const int n = n_antennas;
        const double theta = uniform(rng, -1.0, 1.0);
        const cd beta = rng.complex_normal(0.01);
        const double noise = 1e-6;
        const int snapshots = 1 + static_cast<int>(rng.uniform() * 8);
        const CMat rx = random_psd(rng, n, n, 0.1);

        const auto f = sensing::fim_functionals(theta, beta, n, snapshots, noise);
        const double expected = 1.0 / sensing::crb_theta(sensing::fim(theta, beta, rx, snapshots, noise));

        sdp::SdpProblem p;
        const auto x = p.add_hermitian(n, sdp::VarRole::Other, false);
        // pin X = rx through n^2 independent real functionals
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                CMat e = CMat::Zero(n, n);
                if (i == j) {
                    e(i, i) = 1.0;
                    p.add_linear(x.inner(e), sdp::Sense::Eq, rx(i, i).real());
                    continue;
                }
                e(i, j) = 1.0;
                e(j, i) = 1.0;
                p.add_linear(x.inner(e), sdp::Sense::Eq, (e * rx).trace().real());
                e(i, j) = cd(0, 1);
                e(j, i) = cd(0, -1);
                p.add_linear(x.inner(e), sdp::Sense::Eq, (e * rx).trace().real());
            }
        // U in units of J_tt (an upper bound of 1/CRB) keeps the solve well scaled
        const double unit = f.evaluate(rx).j_tt;
        const auto u = p.add_scalar("U");
        p.add_lmi(opt::crb_lmi({x}, unit * sdp::AffineExpr(u), f), "crb");
        p.maximize(u);
        p.hint(x, rx);
        p.hint(u, 0.5);
        const auto o = sdp::solve(p, 1e-10);
        if (!o.optimal()) {
            r.passed = false;
            r.detail = std::string("solver status ") + sdp::to_string(o.status) + ": " + o.diagnostics;
            return;
        }
        const double got = unit * o.value(u);
        const double rel = std::abs(got - expected) / expected;
        r.passed = rel < 1e-5;
        r.detail = "max U = " + fmt(got) + ", 1/CRB = " + fmt(expected) + ", relative error " + fmt(rel);
    });
}

CheckResult check_sprocedure_sampling(std::uint64_t seed, int samples) {
    return timed("sprocedure-sampling", [&](CheckResult& r) {
        Rng rng(mix_seed(seed, 0x53505200));
        const double noise = 1e-6;
        double worst_excess = -1e300;
        double worst_shortfall = 0.0;
        for (int c = 0; c < 6; ++c) {
            const int n = 4 + c % 5;
            const CVec v = rng.complex_normal_vector(n, 0.1);
            const CMat w = v * v.adjoint();
            const CMat r_sum = random_psd(rng, n, 1 + c % n, 0.05);
            const CVec h = 0.1 * std::polar(1.0, uniform(rng, 0, 2 * kPi)) *
                           sensing::steering_vector(uniform(rng, -1.2, 1.2), n, 0.5);
            const double eps = c == 0 ? 0.0 : uniform(rng, 0.005, 0.05);
            const double lambda = opt::certify_lambda(w, r_sum, h, eps, noise).lambda;
            const std::vector<CMat> wl{w};
            const std::vector<CMat> rl{r_sum};
            auto gamma = [&](const CVec& u) {
                return semantics::sinr_eve(0, h + u, wl, rl, noise, semantics::EveInterference::SensingOnly);
            };
            double best = gamma(CVec::Zero(n));
            CVec best_u = CVec::Zero(n);
            for (int s = 0; s < samples; ++s) {
                CVec u = rng.ball(n, eps);
                if (s % 2 == 1 && u.norm() > 0.0) u *= eps / u.norm();  // half on the sphere
                const double g = gamma(u);
                if (g > best) {
                    best = g;
                    best_u = u;
                }
            }
            worst_excess = std::max(worst_excess, (best - lambda) / std::max(1.0, lambda));

            // projected gradient ascent from the best sample: the certificate should be tight
            double step = 1e-3 * std::max(eps, 1e-12);
            CVec u = best_u;
            for (int it = 0; it < 2000 && eps > 0.0; ++it) {
                const CVec y = h + u;
                const double num = (y.adjoint() * w * y)(0).real();
                const double den = (y.adjoint() * r_sum * y)(0).real() + noise;
                const CVec grad = 2.0 * (w * y - (num / den) * (r_sum * y)) / den;
                CVec next = u + step * grad / std::max(grad.norm(), 1e-300) * eps;
                if (next.norm() > eps) next *= eps / next.norm();
                const double g = gamma(next);
                if (g > best) {
                    best = g;
                    u = next;
                    step *= 1.5;
                } else {
                    step *= 0.5;
                }
            }
            worst_excess = std::max(worst_excess, (best - lambda) / std::max(1.0, lambda));
            worst_shortfall = std::max(worst_shortfall, (lambda - best) / std::max(1e-300, lambda));
        }
        r.passed = worst_excess <= 1e-6 && worst_shortfall <= 1e-3;
        r.detail = std::to_string(samples) + " samples per case, max (Gamma - lambda) = " + fmt(worst_excess) +
                   ", certificate slack " + fmt(worst_shortfall);
    });
}

CheckResult check_embedding(std::uint64_t seed) {
    return timed("embedding", [&](CheckResult& r) {
        Rng rng(mix_seed(seed, 0x454d42));
        double worst = 0.0;
        for (int n = 1; n <= 6; ++n) {
            const CMat h = random_hermitian(rng, n);
            const RMat e = sdp::embed_hermitian(h);
            Eigen::SelfAdjointEigenSolver<CMat> ec(h, Eigen::EigenvaluesOnly);
            Eigen::SelfAdjointEigenSolver<RMat> er(e, Eigen::EigenvaluesOnly);
            RVec doubled(2 * n);
            for (int i = 0; i < n; ++i) doubled[2 * i] = doubled[2 * i + 1] = ec.eigenvalues()[i];
            worst = std::max(worst, (er.eigenvalues() - doubled).cwiseAbs().maxCoeff());
            worst = std::max(worst, (sdp::unembed_hermitian(e) - h).cwiseAbs().maxCoeff());

            CMat p(n, n + 1);
            for (int j = 0; j <= n; ++j) p.col(j) = rng.complex_normal_vector(n, 1.0);
            const RMat lhs = sdp::embed_hermitian(p.adjoint() * h * p);
            const RMat ep = sdp::embed_complex(p);
            worst = std::max(worst, (lhs - ep.transpose() * e * ep).cwiseAbs().maxCoeff() / (1.0 + lhs.norm()));

            const CMat g = random_hermitian(rng, n);
            worst = std::max(worst, std::abs(sdp::hermitian_svec(h).dot(sdp::hermitian_svec(g)) -
                                             (h * g).trace().real()));
            worst = std::max(worst, (sdp::hermitian_smat(sdp::hermitian_svec(h), n) - h).cwiseAbs().maxCoeff());
        }
        r.passed = worst < 1e-10;
        r.detail = "max deviation " + fmt(worst);
    });
}

double robust_violation(const ChannelSet& channels, const opt::BeamformingSolution& sol, int samples,
                        std::uint64_t seed) {
    const int n = channels.n_antennas;
    std::vector<CMat> w;
    for (const auto& b : sol.beams) w.push_back(b * b.adjoint());
    CMat r_sum = CMat::Zero(n, n);
    for (const auto& r : sol.r_mats) r_sum += r;
    const std::vector<CMat> rl{r_sum};
    double worst = -1e300;
    for (int k = 0; k < channels.num_cus(); ++k)
        for (int l = 0; l < channels.num_targets(); ++l) {
            Rng rng(mix_seed(seed, 0x524f42, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(l)));
            const double eps = channels.error_radius[l];
            for (int s = 0; s < samples; ++s) {
                CVec u = rng.ball(n, eps);
                if (s % 2 == 1 && u.norm() > 0.0) u *= eps / u.norm();
                const double g = semantics::sinr_eve(k, channels.target_channels_est[l] + u, w, rl,
                                                     channels.noise_sense_w, semantics::EveInterference::SensingOnly);
                worst = std::max(worst, g - sol.lambda[k]);
            }
        }
    return worst;
}

ScenarioConfig fast_scenario() {
    ScenarioConfig c = reference_scenario();
    c.n_antennas = 8;
    c.target_angles = {-35.0, 40.0};
    c.error_radius = {0.01, 0.01};
    c.pathloss_oneway = {0.1, 0.1};
    c.pathloss_roundtrip = {0.1, 0.1};
    return c;
}

std::vector<CheckResult> cmd_validate(const ValidateOptions& options) {
    const auto seed = options.seed;
    std::vector<CheckResult> out;
    out.push_back(check_bleu_inversion(seed, 1000, options.bleu_denominator_shift));
    out.push_back(check_fim_finite_difference(seed, 20));
    for (int n : {2, 4, 8}) out.push_back(check_crb_lmi(seed, n));
    out.push_back(check_sprocedure_sampling(seed, 10000));
    out.push_back(check_embedding(seed));
    out.push_back(timed("power-accounting", [&](CheckResult& r) {
        const std::vector<double> ones(3, 1.0);
        const std::vector<double> mixed{1.0, 0.5, 0.25};
        const double zero = semantics::computational_power(ones, 0.01);
        const double some = semantics::computational_power(mixed, 0.01);
        const double expected = -0.01 * (std::log(0.5) + std::log(0.25));
        r.passed = zero == 0.0 && std::abs(some - expected) <= 1e-15;
        r.detail = "P_comp(1) = " + fmt(zero) + ", P_comp(mixed) error " + fmt(std::abs(some - expected));
    }));
    if (!options.include_solve) return out;

    ScenarioConfig cfg = fast_scenario();
    cfg.seed = seed;
    const ChannelSet ch = synthesize_channels(cfg, seed);
    opt::RunResult res;
    out.push_back(timed("solve-fast-scenario", [&](CheckResult& r) {
        res = opt::run_algorithm1(cfg, ch, opt::Mode::Full);
        r.passed = res.report.status == opt::RunStatus::Optimal;
        r.detail = std::string(opt::to_string(res.report.status)) + ", objective " +
                   fmt(res.solution.metrics.objective) + ", SDR gap " + fmt(res.solution.sdr_gap);
    }));
    if (!out.back().passed) return out;
    out.push_back(timed("solve-power-budget", [&](CheckResult& r) {
        const auto& pw = res.solution.metrics.power;
        r.passed = pw.total() <= pw.budget_w + 1e-6;
        r.detail = "P_comp + P_cs - P_t = " + fmt(pw.total() - pw.budget_w) + " W";
    }));
    out.push_back(timed("solve-robustness", [&](CheckResult& r) {
        const double v = robust_violation(ch, res.solution, 10000, seed);
        r.passed = v <= 1e-6;
        r.detail = "max sampled Gamma - lambda = " + fmt(v);
    }));
    out.push_back(timed("solve-report-roundtrip", [&](CheckResult& r) {
        const auto report = nlohmann::json::parse(make_report(cfg, seed, res).dump());
        const Verification v = verify_report(report);
        r.passed = v.ok;
        r.detail = "worst field " + v.worst_field + " error " + fmt(v.worst_error) +
                   (v.digest_ok ? "" : ", digest mismatch");
    }));
    return out;
}

}  // namespace iscsc::harness
