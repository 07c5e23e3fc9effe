// SPDX-License-Identifier: Apache-2.0
#include "iscsc/optimizer.hpp"
#include "iscsc/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace iscsc::opt {

using sdp::AffineExpr;
using sdp::Sense;

namespace {

CMat outer(const CVec& h) { return h * h.adjoint(); }

CMat interior(const CMat& m, int n) {
    const double tr = std::max(0.0, m.trace().real());
    return 0.99 * m + (0.001 * tr / n) * CMat::Identity(n, n);
}

}  // namespace

Step1Problem build_step1(const Design& d, const IterateState& anchor) {
    const auto& ch = *d.channels;
    const auto& cfg = *d.cfg;
    const int n = d.n();
    Step1Problem out;
    auto& p = out.problem;
    auto& v = out.vars;

    for (int k = 0; k < d.k(); ++k) v.w.push_back(p.add_hermitian(n, sdp::VarRole::CommBeam));
    for (int j = 0; j < d.sensing_vars(); ++j) v.r.push_back(p.add_hermitian(n, sdp::VarRole::SenseBeam));
    std::vector<sdp::HermitianVar> all = v.w;
    all.insert(all.end(), v.r.begin(), v.r.end());

    AffineExpr obj;
    for (int k = 0; k < d.k(); ++k) {
        const CMat hh = outer(ch.cu_channels[k]);
        AffineExpr a = ch.noise_comm_w;
        for (const auto& x : all) a += x.inner(hh);
        const AffineExpr b = a - v.w[k].inner(hh);
        const auto log_a = p.add_scalar("log_a", std::log(ch.noise_comm_w) - 50.0);
        v.log_a.push_back(log_a);
        p.add_log_hypograph(log_a, a);
        const AffineExpr rate = taylor_rate_bound(log_a, b, anchor.b_anchor[k], anchor.rho[k], d.iota);
        obj += (d.kappa_rate / d.rate_scale) *
               (rate - d.iota / anchor.rho[k] * std::log2(1.0 + anchor.lambda[k]));
        if (cfg.qos_threshold > 0.0) p.add_linear(rate, Sense::Ge, cfg.qos_threshold, "qos");
    }

    AffineExpr power = semantics::computational_power(anchor.rho, cfg.f_coeff);
    for (const auto& x : all) power += x.trace();
    p.add_linear(power, Sense::Le, d.budget_w, "power");

    v.t.assign(d.k(), std::vector<std::optional<sdp::ScalarVar>>(d.l()));
    for (int k = 0; k < d.k(); ++k) {
        for (int l = 0; l < d.l(); ++l) {
            const CVec& h = ch.target_channels_est[l];
            const double eps = ch.error_radius[l];
            const double lambda = anchor.lambda[k];
            if (eps > 0.0) {
                const double t_hint = anchor.t_aux.size() > 0 ? anchor.t_aux(k, l) : 0.0;
                const auto t = p.add_scalar("t", 0.0, 1e6 * (1.0 + t_hint));
                v.t[k][l] = t;
                p.add_lmi(sprocedure_lmi(v.w[k], v.r, lambda, t, h, eps, ch.noise_sense_w), "sprocedure");
                p.hint(t, t_hint);
            } else {
                const CMat hh = outer(h);
                AffineExpr slack = lambda * ch.noise_sense_w - v.w[k].inner(hh);
                for (const auto& r : v.r) slack += lambda * r.inner(hh);
                p.add_linear(slack, Sense::Ge, 0.0, "sprocedure");
            }
        }
    }

    const CMat rx_anchor = anchor.transmit_covariance(n);
    for (int l = 0; l < d.l(); ++l) {
        const double crb = sensing::crb_theta(d.fims[l].evaluate(rx_anchor));
        // U and its inverse are carried in units of the anchor CRB
        const auto u = p.add_scalar("U");
        const auto inv = p.epigraph_inverse(u, 1e6);
        v.u.push_back(u);
        v.v.push_back(inv);
        v.crb_unit.push_back(crb);
        p.add_lmi(crb_lmi(all, (1.0 / crb) * AffineExpr(u), d.fims[l]), "crb");
        obj -= (d.kappa_crb * crb / d.crb_scale) * AffineExpr(inv);
        p.hint(u, 0.5);
        p.hint(inv, 4.0);
    }
    p.maximize(obj);

    for (int k = 0; k < d.k(); ++k) p.hint(v.w[k], interior(anchor.w_mats[k], n));
    for (int j = 0; j < d.sensing_vars(); ++j) p.hint(v.r[j], interior(anchor.r_mats[j], n));
    for (int k = 0; k < d.k(); ++k) {
        const RateTerms t = rate_terms(d, anchor, k);
        p.hint(v.log_a[k], std::log(t.a) - 1e-3);
    }
    return out;
}

IterateState read_step1(const Design& d, const Step1Problem& p, const sdp::SolveOutcome& o,
                        const IterateState& anchor) {
    IterateState s = anchor;
    for (int k = 0; k < d.k(); ++k) {
        const CMat w = o.value(p.vars.w[k]);
        s.w_mats[k] = 0.5 * (w + w.adjoint());
    }
    for (std::size_t j = 0; j < p.vars.r.size(); ++j) {
        const CMat r = o.value(p.vars.r[j]);
        s.r_mats[j] = 0.5 * (r + r.adjoint());
    }
    for (int k = 0; k < d.k(); ++k)
        for (int l = 0; l < d.l(); ++l)
            if (p.vars.t[k][l]) s.t_aux(k, l) = o.value(*p.vars.t[k][l]);
    for (std::size_t l = 0; l < p.vars.u.size(); ++l) s.u_caps[l] = o.value(p.vars.u[l]) / p.vars.crb_unit[l];
    return s;
}

std::vector<double> update_lambda(const Design& d, IterateState& s) {
    const auto& ch = *d.channels;
    const CMat r_sum = s.sensing_sum(d.n());
    std::vector<double> lambda(d.k(), 0.0);
    if (s.t_aux.rows() != d.k() || s.t_aux.cols() != d.l()) s.t_aux = RMat::Zero(d.k(), d.l());
    for (int k = 0; k < d.k(); ++k) {
        for (int l = 0; l < d.l(); ++l) {
            const auto cert = certify_lambda(s.w_mats[k], r_sum, ch.target_channels_est[l], ch.error_radius[l],
                                             ch.noise_sense_w);
            lambda[k] = std::max(lambda[k], cert.lambda);
        }
        // multipliers for the binding lambda (the Step 1 warm start)
        for (int l = 0; l < d.l(); ++l) {
            double t = 0.0;
            sprocedure_feasible(s.w_mats[k], r_sum, ch.target_channels_est[l], ch.error_radius[l], ch.noise_sense_w,
                                lambda[k], &t);
            s.t_aux(k, l) = t;
        }
    }
    return lambda;
}

RhoBounds rho_bounds(const Design& d, const IterateState& s) {
    RhoBounds b;
    const double qos = d.cfg->qos_threshold;
    for (int k = 0; k < d.k(); ++k) {
        const RateTerms t = rate_terms(d, s, k);
        b.lower.push_back(d.rho_lower[k]);
        const double rho_qos = qos > 0.0 ? d.iota * std::log2(t.a / t.b) / qos : 1.0;
        b.upper.push_back(std::min(1.0, rho_qos));
    }
    return b;
}

std::vector<double> maximize_rho(std::span<const double> c, const RhoBounds& bounds, double f_coeff,
                                 double power_left) {
    const int k = static_cast<int>(c.size());
    if (!(f_coeff > 0.0)) throw DomainError("F must be positive");
    std::vector<double> y_lo(k), y_hi(k);
    double base = 0.0;
    for (int i = 0; i < k; ++i) {
        if (bounds.lower[i] > bounds.upper[i] * (1.0 + 1e-12))
            throw InfeasibleError("QoS floor needs a larger extraction ratio than allowed for CU " +
                                  std::to_string(i));
        const double hi = std::min(bounds.upper[i], 1.0);
        const double lo = std::min(bounds.lower[i], hi);
        y_lo[i] = -std::log(hi);
        y_hi[i] = -std::log(lo);
        base += y_lo[i];
    }
    // y = -ln rho: maximize sum c e^y over the box and F sum y <= power_left.
    // The objective is convex, so a vertex of that polytope is optimal.
    const double budget = power_left / f_coeff;
    if (base > budget + 1e-12 * (1.0 + std::abs(budget)))
        throw InfeasibleError("compute power exceeds the remaining budget at the largest extraction ratios");

    auto value = [&](const std::vector<double>& y) {
        double s = 0.0;
        for (int i = 0; i < k; ++i) s += c[i] * std::exp(y[i]);
        return s;
    };
    std::vector<double> best = y_lo;
    double best_val = value(best);
    auto consider = [&](const std::vector<double>& y) {
        const double v = value(y);
        if (v > best_val) {
            best_val = v;
            best = y;
        }
    };

    if (k <= 16) {
        std::vector<double> y(k);
        for (unsigned mask = 0; mask < (1u << k); ++mask) {
            double used = 0.0;
            for (int i = 0; i < k; ++i) {
                y[i] = (mask >> i) & 1u ? y_hi[i] : y_lo[i];
                used += y[i];
            }
            if (used <= budget) consider(y);
            // one coordinate absorbs the rest of the budget
            for (int f = 0; f < k; ++f) {
                const double rest = budget - (used - y[f]);
                if (rest >= y_lo[f] && rest <= y_hi[f]) {
                    std::vector<double> z = y;
                    z[f] = rest;
                    consider(z);
                }
            }
        }
    } else {
        std::vector<int> order(k);
        for (int i = 0; i < k; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return c[a] > c[b]; });
        std::vector<double> y = y_lo;
        double left = budget - base;
        for (int i : order) {
            if (c[i] <= 0.0 || left <= 0.0) break;
            const double step = std::min(y_hi[i] - y_lo[i], left);
            y[i] += step;
            left -= step;
        }
        consider(y);
    }
    std::vector<double> rho(k);
    for (int i = 0; i < k; ++i) rho[i] = std::clamp(std::exp(-best[i]), 1e-300, 1.0);
    return rho;
}

std::vector<double> update_rho(const Design& d, const IterateState& s) {
    if (d.mode != Mode::Full) return std::vector<double>(d.k(), 1.0);
    std::vector<double> c;
    for (int k = 0; k < d.k(); ++k) {
        const RateTerms t = rate_terms(d, s, k);
        c.push_back(d.iota * (std::log2(t.a / t.b) - std::log2(1.0 + s.lambda[k])));
    }
    double cs = 0.0;
    for (const auto& w : s.w_mats) cs += w.trace().real();
    for (const auto& r : s.r_mats) cs += r.trace().real();
    return maximize_rho(c, rho_bounds(d, s), d.cfg->f_coeff, d.budget_w - cs);
}

RandomizationResult gaussian_randomization(std::span<const CMat> w_sdr, int count, const CandidateScore& score,
                                           std::uint64_t seed) {
    const std::size_t k = w_sdr.size();
    std::vector<CMat> factors(k);
    std::vector<double> traces(k);
    std::vector<CVec> principal(k);
    for (std::size_t i = 0; i < k; ++i) {
        const CMat w = 0.5 * (w_sdr[i] + w_sdr[i].adjoint());
        Eigen::SelfAdjointEigenSolver<CMat> es(w);
        const RVec ev = es.eigenvalues().cwiseMax(0.0);
        factors[i] = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
        traces[i] = std::max(0.0, w.trace().real());
        principal[i] = std::sqrt(traces[i]) * es.eigenvectors().col(w.rows() - 1);
    }

    RandomizationResult out;
    out.vectors = principal;
    out.objective = -std::numeric_limits<double>::infinity();
    if (const auto v = score(principal)) {
        out.objective = *v;
        out.feasible = true;
    }

    Rng rng(seed);
    std::vector<CVec> cand(k);
    for (int m = 0; m < count; ++m) {
        for (std::size_t i = 0; i < k; ++i) {
            const CVec z = rng.complex_normal_vector(static_cast<int>(factors[i].cols()), 1.0);
            CVec xi = factors[i] * z;
            const double nrm = xi.norm();
            cand[i] = nrm > 0.0 ? CVec(xi * (std::sqrt(traces[i]) / nrm)) : CVec::Zero(xi.size());
        }
        if (const auto v = score(cand)) {
            ++out.feasible_samples;
            if (!out.feasible || *v > out.objective) {
                out.objective = *v;
                out.vectors = cand;
                out.feasible = true;
                out.from_samples = true;
            }
        }
    }
    return out;
}

}  // namespace iscsc::opt
