// SPDX-License-Identifier: Apache-2.0
#include "iscsc/optimizer.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace iscsc::opt {

using sdp::AffineExpr;

Mode parse_mode(const std::string& s) {
    if (s == "full") return Mode::Full;
    if (s == "rho1" || s == "rho-fixed-1") return Mode::RhoFixed1;
    if (s == "conventional" || s == "conventional-isac") return Mode::Conventional;
    throw ConfigError("mode", "unknown mode '" + s + "' (full, rho1, conventional)");
}

const char* to_string(Mode m) {
    switch (m) {
        case Mode::Full: return "full";
        case Mode::RhoFixed1: return "rho1";
        case Mode::Conventional: return "conventional";
    }
    return "unknown";
}

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Optimal: return "optimal";
        case RunStatus::Infeasible: return "infeasible";
        case RunStatus::NumericalLimit: return "numerical-limit";
    }
    return "unknown";
}

int Design::sensing_vars() const {
    if (l() == 0) return 0;
    return aggregate_sensing ? 1 : l();
}

Design make_design(const ScenarioConfig& cfg, const ChannelSet& channels, Mode mode) {
    Design d;
    d.cfg = &cfg;
    d.channels = &channels;
    d.mode = mode;
    d.iota = mode == Mode::Conventional ? 1.0 : cfg.iota;
    d.kappa_rate = cfg.kappa;
    d.kappa_crb = cfg.kappa;
    d.budget_w = dbm_to_watts(cfg.power_budget_dbm);
    d.aggregate_sensing = cfg.sensing_covariance == SensingCovariance::Aggregate;
    for (int k = 0; k < channels.num_cus(); ++k)
        d.rho_lower.push_back(mode == Mode::Full ? semantics::rho_lower_bound(cfg.bleu_params[k]) : 1.0);
    for (int l = 0; l < channels.num_targets(); ++l)
        d.fims.push_back(sensing::fim_functionals(channels.target_angles_rad[l], channels.beta[l],
                                                  channels.n_antennas, cfg.snapshots, channels.noise_sense_w,
                                                  channels.spacing_ratio));
    return d;
}

CMat IterateState::sensing_sum(int n) const {
    CMat s = CMat::Zero(n, n);
    for (const auto& r : r_mats) s += r;
    return s;
}

CMat IterateState::transmit_covariance(int n) const {
    CMat s = sensing_sum(n);
    for (const auto& w : w_mats) s += w;
    return s;
}

namespace {

double quad(const CVec& h, const CMat& m) { return (h.adjoint() * m * h)(0).real(); }

double crb_sum(const Design& d, const CMat& rx) {
    double s = 0.0;
    for (const auto& f : d.fims) s += sensing::crb_theta(f.evaluate(rx));
    return s;
}

}  // namespace

RateTerms rate_terms(const Design& d, const IterateState& s, int k) {
    const CVec& h = d.channels->cu_channels[k];
    RateTerms t;
    t.a = quad(h, s.transmit_covariance(d.n())) + d.channels->noise_comm_w;
    t.b = t.a - quad(h, s.w_mats[k]);
    return t;
}

double objective(const Design& d, const IterateState& s) {
    double rate = 0.0;
    for (int k = 0; k < d.k(); ++k) {
        const RateTerms t = rate_terms(d, s, k);
        rate += d.iota / s.rho[k] * (std::log2(t.a / t.b) - std::log2(1.0 + s.lambda[k]));
    }
    const double crb = d.l() > 0 ? crb_sum(d, s.transmit_covariance(d.n())) : 0.0;
    return d.kappa_rate * rate / d.rate_scale - d.kappa_crb * crb / d.crb_scale;
}

AffineExpr taylor_rate_bound(const AffineExpr& log_a, const AffineExpr& b_expr, double b_anchor, double rho,
                             double iota) {
    if (!(b_anchor > 0.0)) throw DomainError("Taylor anchor B must be positive");
    const double g = iota / rho;
    return g * (log_a * (1.0 / kLn2) - std::log2(b_anchor) - (b_expr - b_anchor) * (1.0 / (b_anchor * kLn2)));
}

double taylor_rate_value(double a, double b, double b_anchor, double rho, double iota) {
    return iota / rho * (std::log2(a) - std::log2(b_anchor) - (b - b_anchor) / (b_anchor * kLn2));
}

AffineExpr taylor_lambda_bound(const AffineExpr& lambda, double c_anchor, double rho, double iota) {
    if (!(c_anchor >= 1.0)) throw DomainError("Taylor anchor C must be at least 1");
    return -(iota / rho) * (std::log2(c_anchor) + (lambda + 1.0 - c_anchor) * (1.0 / (c_anchor * kLn2)));
}

double taylor_lambda_value(double lambda, double c_anchor, double rho, double iota) {
    return -(iota / rho) * (std::log2(c_anchor) + (lambda + 1.0 - c_anchor) / (c_anchor * kLn2));
}

sdp::ComplexLmi sprocedure_lmi(const sdp::HermitianVar& w, const std::vector<sdp::HermitianVar>& r_vars,
                               double lambda, const AffineExpr& t, const CVec& h_est, double eps,
                               double noise_w) {
    const int n = w.dim;
    CMat p(n, n + 1);
    p.leftCols(n).setIdentity();
    p.col(n) = h_est;
    sdp::ComplexLmi g(n + 1);
    g.add_congruence(w, p, -1.0);
    for (const auto& r : r_vars) g.add_congruence(r, p, lambda);
    CMat t_coeff = CMat::Identity(n + 1, n + 1);
    t_coeff(n, n) = -eps * eps;
    g.add_scalar(t, t_coeff);
    CMat c = CMat::Zero(n + 1, n + 1);
    c(n, n) = lambda * noise_w;
    g.add_constant(c);
    return g;
}

sdp::RealLmi crb_lmi(const std::vector<sdp::HermitianVar>& rx_terms, const AffineExpr& u,
                     const sensing::FimFunctionals& f) {
    auto functional = [&](const CMat& m) {
        AffineExpr e;
        for (const auto& x : rx_terms) e += x.inner(m);
        return e;
    };
    const AffineExpr bb = functional(f.bb);
    sdp::RealLmi g(3);
    g.set(0, 0, functional(f.tt) - u);
    g.set(1, 0, functional(f.tb_re));
    g.set(2, 0, functional(f.tb_im));
    g.set(1, 1, bb);
    g.set(2, 2, bb);
    g.set(2, 1, 0.0);
    return g;
}

namespace {

/// max_t psi(t) for the Schur form of the robust block; see sprocedure_feasible.
struct PsiMax {
    double value;
    double t;
};

PsiMax maximize_psi(const CMat& e, const CVec& h, double eps, double lambda, double noise_w) {
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (e + e.adjoint()));
    const RVec& dvals = es.eigenvalues();
    const CVec b = es.eigenvectors().adjoint() * (e * h);
    const double c0 = lambda * noise_w - quad(h, e);
    const double d_max = dvals.maxCoeff();
    const double scale = dvals.cwiseAbs().maxCoeff() + 1e-300;
    RVec b2 = b.cwiseAbs2();
    const double b_total = b2.sum();
    for (Eigen::Index i = 0; i < b2.size(); ++i)
        if (b2[i] <= 1e-30 * (b_total + 1e-300)) b2[i] = 0.0;

    const double t_lo = std::max(0.0, d_max);
    auto psi = [&](double t) {
        double v = c0 - t * eps * eps;
        for (Eigen::Index i = 0; i < b2.size(); ++i) {
            if (b2[i] == 0.0) continue;
            const double gap = t - dvals[i];
            if (!(gap > 0.0)) return -std::numeric_limits<double>::infinity();
            v -= b2[i] / gap;
        }
        return v;
    };
    auto dpsi = [&](double t) {
        double v = -eps * eps;
        for (Eigen::Index i = 0; i < b2.size(); ++i) {
            if (b2[i] == 0.0) continue;
            const double gap = t - dvals[i];
            if (!(gap > 0.0)) return std::numeric_limits<double>::infinity();
            v += b2[i] / (gap * gap);
        }
        return v;
    };

    if (dpsi(t_lo) <= 0.0) return {psi(t_lo), t_lo};
    // psi' is decreasing; it is negative beyond d_max + ||b|| / eps
    double lo = t_lo;
    double hi = std::max(t_lo, d_max) + std::sqrt(b2.sum()) / eps + 1e-12 * scale;
    while (dpsi(hi) > 0.0) hi = t_lo + 2.0 * (hi - t_lo) + 1e-300;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (std::abs(hi) + scale); ++it) {
        const double mid = 0.5 * (lo + hi);
        (dpsi(mid) > 0.0 ? lo : hi) = mid;
    }
    const double v_lo = psi(lo);
    const double v_hi = psi(hi);
    return v_hi >= v_lo ? PsiMax{v_hi, hi} : PsiMax{v_lo, lo};
}

}  // namespace

bool sprocedure_feasible(const CMat& w, const CMat& r_sum, const CVec& h_est, double eps, double noise_w,
                         double lambda, double* t_best, double tol) {
    const CMat e = w - lambda * r_sum;
    if (eps == 0.0) {
        if (t_best) *t_best = 0.0;
        return lambda * noise_w - quad(h_est, e) >= -tol;
    }
    const PsiMax m = maximize_psi(e, h_est, eps, lambda, noise_w);
    if (t_best) *t_best = m.t;
    return m.value >= -tol;
}

LambdaCertificate certify_lambda(const CMat& w, const CMat& r_sum, const CVec& h_est, double eps, double noise_w) {
    if (!(noise_w > 0.0)) throw DomainError("eavesdropper noise must be positive");
    if (eps < 0.0) throw DomainError("error radius must be non-negative");
    const double at_estimate = std::max(0.0, quad(h_est, w)) / (std::max(0.0, quad(h_est, r_sum)) + noise_w);
    if (eps == 0.0) return {at_estimate, 0.0};

    LambdaCertificate out;
    double t = 0.0;
    if (sprocedure_feasible(w, r_sum, h_est, eps, noise_w, 0.0, &t)) return {0.0, t};
    double lo = at_estimate;
    if (sprocedure_feasible(w, r_sum, h_est, eps, noise_w, lo, &t) && lo > 0.0) {
        // the estimate is already the worst case (only possible in degenerate geometry)
        return {lo, t};
    }
    double hi = std::max(2.0 * lo, 1e-12);
    int grow = 0;
    while (!sprocedure_feasible(w, r_sum, h_est, eps, noise_w, hi, &t)) {
        lo = hi;
        hi *= 2.0;
        if (++grow > 200) throw NumericalError("lambda bracket failure");
    }
    out.lambda = hi;
    out.t = t;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sprocedure_feasible(w, r_sum, h_est, eps, noise_w, mid, &t)) {
            hi = mid;
            out = {hi, t};
        } else {
            lo = mid;
        }
    }
    return out;
}

Metrics evaluate_metrics(const Design& d, std::span<const CMat> w_mats, std::span<const CMat> r_mats,
                         std::span<const double> rho, std::span<const double> lambda) {
    const auto& ch = *d.channels;
    Metrics m;
    m.rho.assign(rho.begin(), rho.end());
    m.lambda.assign(lambda.begin(), lambda.end());
    for (int k = 0; k < d.k(); ++k) {
        const double g = semantics::sinr_cu(k, ch.cu_channels, w_mats, r_mats, ch.noise_comm_w);
        m.sinr.push_back(g);
        m.semantic_rate.push_back(semantics::semantic_rate(rho[k], g, d.iota));
        m.ssr.push_back(semantics::worst_case_ssr(k, ch, w_mats, r_mats, rho[k], d.iota));
        m.sum_semantic_rate += m.semantic_rate.back();
        m.sum_ssr += m.ssr.back();
    }
    CMat rx = CMat::Zero(d.n(), d.n());
    CMat r_sum = CMat::Zero(d.n(), d.n());
    for (const auto& r : r_mats) r_sum += r;
    rx += r_sum;
    for (const auto& w : w_mats) rx += w;
    for (int l = 0; l < d.l(); ++l) {
        const double crb = sensing::crb_theta(d.fims[l].evaluate(rx));
        m.crb.push_back(crb);
        m.rcrb.push_back(std::sqrt(crb));
        m.sum_rcrb += m.rcrb.back();
        double margin = std::numeric_limits<double>::infinity();
        for (int k = 0; k < d.k(); ++k) {
            const double gamma = semantics::sinr_eve(k, ch.target_channels_est[l], w_mats, r_mats, ch.noise_sense_w,
                                                     semantics::EveInterference::SensingOnly);
            margin = std::min(margin, lambda[k] - gamma);
        }
        m.lambda_margin.push_back(margin);
    }
    m.power.comp_w = semantics::computational_power(rho, d.cfg->f_coeff);
    m.power.cs_w = semantics::transmit_power(w_mats, r_mats);
    m.power.budget_w = d.budget_w;

    IterateState s;
    s.w_mats.assign(w_mats.begin(), w_mats.end());
    s.r_mats.assign(r_mats.begin(), r_mats.end());
    s.rho = m.rho;
    s.lambda = m.lambda;
    m.objective = objective(d, s);
    return m;
}

}  // namespace iscsc::opt
