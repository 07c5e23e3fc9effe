// SPDX-License-Identifier: Apache-2.0
#include "iscsc/sdp/conic.hpp"
#include "iscsc/sdp/embed.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

namespace iscsc::sdp {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::NumericalLimit: return "numerical-limit";
    }
    return "unknown";
}

double ConicForm::barrier_parameter() const {
    double nu = static_cast<double>(rows.size()) + 2.0 * static_cast<double>(hypographs.size());
    for (const auto& b : blocks) nu += b.dim;
    return nu;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_identity(const RMat& q) {
    return q.rows() == q.cols() && q.isIdentity(0.0);
}

RMat embedded_var(const RVec& x, int offset, int n) {
    return embed_complex(hermitian_smat(x.data() + offset, n));
}

RMat congruence_value(const CongruenceTerm& t, const RVec& x) {
    const RMat e = embedded_var(x, t.offset, t.n);
    if (is_identity(*t.q)) return t.coeff * e;
    return t.coeff * (t.q->transpose() * e * (*t.q));
}

void add_sym(RMat& m, const std::vector<SymEntry>& entries, double scale) {
    for (const auto& e : entries) {
        m(e.row, e.col) += scale * e.value;
        if (e.row != e.col) m(e.col, e.row) += scale * e.value;
    }
}

/// tr(S F) for sparse symmetric F.
double trace_with(const RMat& s, const std::vector<SymEntry>& entries) {
    double t = 0.0;
    for (const auto& e : entries) t += e.value * (e.row == e.col ? s(e.row, e.col) : 2.0 * s(e.row, e.col));
    return t;
}

RMat dense_of(const std::vector<SymEntry>& entries, int dim) {
    RMat m = RMat::Zero(dim, dim);
    add_sym(m, entries, 1.0);
    return m;
}

}  // namespace

RMat ConicForm::block_value(const LmiBlock& b, const RVec& x) const {
    RMat f = b.constant;
    for (const auto& st : b.scalars) add_sym(f, st.entries, x[st.var]);
    for (const auto& ct : b.congruences) f += congruence_value(ct, x);
    return f;
}

namespace {

/// Barrier function of a ConicForm without equalities.
class Barrier {
public:
    explicit Barrier(const ConicForm& p) : p_(p) {
        for (const auto& r : p_.rows)
            (r.index.size() > 16 ? dense_rows_ : sparse_rows_).push_back(&r);
        rank_ = static_cast<int>(dense_rows_.size() + 2 * p_.hypographs.size());
        for (const auto& b : p_.blocks)
            if (low_rank_scalars(b)) rank_ += b.dim * b.dim;
    }

    /// phi(x), or +inf outside the domain.
    double value(const RVec& x) const {
        double phi = 0.0;
        for (const auto& r : p_.rows) {
            const double g = r.eval(x);
            if (!(g > 0.0)) return kInf;
            phi -= std::log(g);
        }
        for (const auto& h : p_.hypographs) {
            const double a = h.arg.eval(x);
            if (!(a > 0.0)) return kInf;
            const double z = std::log(a) - h.upper.eval(x);
            if (!(z > 0.0)) return kInf;
            phi -= std::log(z) + std::log(a);
        }
        for (const auto& b : p_.blocks) {
            Eigen::LLT<RMat> llt(p_.block_value(b, x));
            if (llt.info() != Eigen::Success) return kInf;
            const auto d = llt.matrixLLT().diagonal();
            for (Eigen::Index i = 0; i < d.size(); ++i) {
                if (!(d[i] > 0.0)) return kInf;
                phi -= 2.0 * std::log(d[i]);
            }
        }
        return phi;
    }

    /// Largest step in (0, 1] keeping the scalar rows and hypograph arguments positive.
    double row_step_limit(const RVec& x, const RVec& dx) const {
        double alpha = 1.0;
        auto limit = [&](const SparseRow& r) {
            const double slope = r.dot(dx);
            if (slope < 0.0) alpha = std::min(alpha, -0.99 * r.eval(x) / slope);
        };
        for (const auto& r : p_.rows) limit(r);
        for (const auto& h : p_.hypographs) limit(h.arg);
        return alpha;
    }

    void derivatives(const RVec& x, RVec& grad, RMat& hess) const {
        const int n = p_.n;
        grad.setZero(n);
        hess.setZero(n, n);

        for (const auto* r : sparse_rows_) {
            const double inv = 1.0 / r->eval(x);
            for (std::size_t a = 0; a < r->index.size(); ++a) {
                grad[r->index[a]] -= r->value[a] * inv;
                for (std::size_t b = 0; b < r->index.size(); ++b)
                    hess(r->index[a], r->index[b]) += r->value[a] * r->value[b] * inv * inv;
            }
        }
        // terms with many dense rows go through one symmetric rank update
        factor_.setZero(n, rank_);
        int col = 0;
        for (const auto* r : dense_rows_) {
            const double inv = 1.0 / r->eval(x);
            for (std::size_t k = 0; k < r->index.size(); ++k) {
                grad[r->index[k]] -= r->value[k] * inv;
                factor_(r->index[k], col) += r->value[k] * inv;
            }
            ++col;
        }
        for (const auto& h : p_.hypographs) hypograph_terms(h, x, grad, col);
        for (const auto& b : p_.blocks) block_terms(b, x, grad, hess, col);
        if (rank_ > 0) hess.selfadjointView<Eigen::Lower>().rankUpdate(factor_);
        hess.triangularView<Eigen::StrictlyUpper>() = hess.transpose();
    }

private:
    static bool low_rank_scalars(const LmiBlock& b) { return b.dim <= 8 && b.scalars.size() > 8; }

    void hypograph_terms(const LogHypograph& h, const RVec& x, RVec& grad, int& col) const {
        const double a = h.arg.eval(x);
        const double z = std::log(a) - h.upper.eval(x);
        const double pa = -1.0 / (a * z) - 1.0 / a;
        const double ps = 1.0 / z;
        const double paa = (z + 1.0) / (a * a * z * z) + 1.0 / (a * a);
        const double pss = 1.0 / (z * z);
        const double pas = -1.0 / (a * z * z);
        // 2x2 Hessian in (arg, upper) factored as L L^T
        const double l11 = std::sqrt(paa);
        const double l21 = pas / l11;
        const double l22 = std::sqrt(std::max(0.0, pss - l21 * l21));
        for (std::size_t i = 0; i < h.arg.index.size(); ++i) {
            grad[h.arg.index[i]] += pa * h.arg.value[i];
            factor_(h.arg.index[i], col) += l11 * h.arg.value[i];
        }
        for (std::size_t i = 0; i < h.upper.index.size(); ++i) {
            grad[h.upper.index[i]] += ps * h.upper.value[i];
            factor_(h.upper.index[i], col) += l21 * h.upper.value[i];
            factor_(h.upper.index[i], col + 1) += l22 * h.upper.value[i];
        }
        col += 2;
    }

    void block_terms(const LmiBlock& b, const RVec& x, RVec& grad, RMat& hess, int& col) const {
        const RMat s = block_inverse(b, p_.block_value(b, x));

        // gradient and Hessian of -log det over scalar terms
        const auto ns = b.scalars.size();
        for (const auto& st : b.scalars) grad[st.var] -= trace_with(s, st.entries);
        if (ns > 0) {
            if (low_rank_scalars(b)) {
                // kron(S, S) = (L x L)(L x L)^T: column (a, b) of the factor holds (L^T F_j L)(a, b)
                const RMat l = Eigen::LLT<RMat>(s).matrixL();
                for (const auto& st : b.scalars)
                    for (const auto& e : st.entries)
                        for (int cb = 0; cb < b.dim; ++cb)
                            for (int ca = 0; ca < b.dim; ++ca) {
                                double v = l(e.row, ca) * l(e.col, cb);
                                if (e.row != e.col) v += l(e.col, ca) * l(e.row, cb);
                                factor_(st.var, col + ca + cb * b.dim) += e.value * v;
                            }
                col += b.dim * b.dim;
            } else if (b.dim <= 8) {
                const int d2 = b.dim * b.dim;
                RMat phi = RMat::Zero(static_cast<Eigen::Index>(ns), d2);
                for (std::size_t j = 0; j < ns; ++j)
                    for (const auto& e : b.scalars[j].entries) {
                        phi(j, e.row + e.col * b.dim) += e.value;
                        if (e.row != e.col) phi(j, e.col + e.row * b.dim) += e.value;
                    }
                RMat kron(d2, d2);
                for (int c1 = 0; c1 < b.dim; ++c1)
                    for (int r1 = 0; r1 < b.dim; ++r1)
                        for (int c2 = 0; c2 < b.dim; ++c2)
                            for (int r2 = 0; r2 < b.dim; ++r2)
                                kron(r1 + c1 * b.dim, r2 + c2 * b.dim) = s(c1, c2) * s(r1, r2);
                const RMat hs = phi * kron * phi.transpose();
                for (std::size_t i = 0; i < ns; ++i)
                    for (std::size_t j = 0; j < ns; ++j)
                        hess(b.scalars[i].var, b.scalars[j].var) += hs(i, j);
            } else {
                for (std::size_t i = 0; i < ns; ++i) {
                    const RMat g = s * dense_of(b.scalars[i].entries, b.dim) * s;
                    for (std::size_t j = 0; j < ns; ++j)
                        hess(b.scalars[i].var, b.scalars[j].var) += trace_with(g, b.scalars[j].entries);
                }
            }
        }

        const auto nc = b.congruences.size();
        if (nc == 0) return;

        // Q S Q^T for each congruence term
        std::vector<RMat> qsq(nc);
        for (std::size_t t = 0; t < nc; ++t) {
            const auto& ct = b.congruences[t];
            qsq[t] = is_identity(*ct.q) ? s : RMat((*ct.q) * s * ct.q->transpose());
            const auto& basis = embedded_basis(ct.n);
            for (std::size_t i = 0; i < basis.size(); ++i) {
                double tr = 0.0;
                for (const auto& e : basis[i]) tr += e.value * qsq[t](e.col, e.row);
                grad[ct.offset + static_cast<int>(i)] -= ct.coeff * tr;
            }
        }

        // congruence x congruence, kernel shared between terms with the same Q pair
        std::map<std::pair<const RMat*, const RMat*>, RMat> kernels;
        for (std::size_t t1 = 0; t1 < nc; ++t1) {
            for (std::size_t t2 = t1; t2 < nc; ++t2) {
                const auto& a = b.congruences[t1];
                const auto& c = b.congruences[t2];
                const auto key = std::make_pair(a.q.get(), c.q.get());
                auto it = kernels.find(key);
                if (it == kernels.end()) {
                    const RMat m = (*a.q) * s * c.q->transpose();
                    it = kernels.emplace(key, congruence_kernel(m, a.n, c.n)).first;
                }
                const RMat& k = it->second;
                const double w = a.coeff * c.coeff;
                const auto na = static_cast<Eigen::Index>(a.n) * a.n;
                const auto nb = static_cast<Eigen::Index>(c.n) * c.n;
                hess.block(a.offset, c.offset, na, nb) += w * k;
                if (t1 != t2) hess.block(c.offset, a.offset, nb, na) += w * k.transpose();
            }
        }

        // congruence x scalar
        for (const auto& st : b.scalars) {
            const RMat y = s * dense_of(st.entries, b.dim) * s;
            for (const auto& ct : b.congruences) {
                const RMat z = is_identity(*ct.q) ? y : RMat((*ct.q) * y * ct.q->transpose());
                const auto& basis = embedded_basis(ct.n);
                for (std::size_t i = 0; i < basis.size(); ++i) {
                    double tr = 0.0;
                    for (const auto& e : basis[i]) tr += e.value * z(e.col, e.row);
                    const double v = ct.coeff * tr;
                    hess(ct.offset + static_cast<int>(i), st.var) += v;
                    hess(st.var, ct.offset + static_cast<int>(i)) += v;
                }
            }
        }
    }

    /// F^{-1}; a complex block is inverted in complex form so the result keeps
    /// the embedded structure exactly.
    static RMat block_inverse(const LmiBlock& b, const RMat& f) {
        if (b.complex_dim > 0 && 2 * b.complex_dim == b.dim)
            return embed_complex(Eigen::LLT<CMat>(complex_part(f, b.complex_dim, b.complex_dim))
                                     .solve(CMat::Identity(b.complex_dim, b.complex_dim)));
        return Eigen::LLT<RMat>(f).solve(RMat::Identity(b.dim, b.dim));
    }

    /// Complex matrix embedded in m, averaged over its two copies.
    static CMat complex_part(const RMat& m, int r, int c) {
        const RMat re = 0.5 * (m.topLeftCorner(r, c) + m.bottomRightCorner(r, c));
        const RMat im = 0.5 * (m.bottomLeftCorner(r, c) - m.topRightCorner(r, c));
        return re.cast<cd>() + cd(0.0, 1.0) * im.cast<cd>();
    }

    /// K(i, j) = tr(E_i M E_j M^T) over embedded Hermitian bases. M embeds a
    /// complex Mc, so K(i, j) = 2 Re tr(B_i Mc B_j Mc^H) with B the complex basis.
    static RMat congruence_kernel(const RMat& m, int n1, int n2) {
        const CMat mc = complex_part(m, n1, n2);
        const auto& b1 = complex_basis(n1);
        const auto& b2 = complex_basis(n2);
        RMat k(static_cast<Eigen::Index>(b1.size()), static_cast<Eigen::Index>(b2.size()));
        for (std::size_t j = 0; j < b2.size(); ++j) {
            for (std::size_t i = 0; i < b1.size(); ++i) {
                // tr(e_a e_b^T M e_c e_d^T M^H) = M(b, c) conj(M(a, d))
                cd acc = 0.0;
                for (const auto& ei : b1[i])
                    for (const auto& ej : b2[j])
                        acc += ei.value * ej.value * mc(ei.col, ej.row) * std::conj(mc(ei.row, ej.col));
                k(i, j) = 2.0 * acc.real();
            }
        }
        return k;
    }

    struct ComplexEntry {
        int row;
        int col;
        cd value;
    };

    /// Complex Hermitian basis in svec order (see hermitian_svec).
    static const std::vector<std::vector<ComplexEntry>>& complex_basis(int n) {
        static std::mutex mu;
        static std::map<int, std::vector<std::vector<ComplexEntry>>> cache;
        std::lock_guard lock(mu);
        auto [it, fresh] = cache.try_emplace(n);
        if (!fresh) return it->second;
        const double s = 1.0 / std::sqrt(2.0);
        auto& basis = it->second;
        for (int j = 0; j < n; ++j) {
            basis.push_back({{j, j, 1.0}});
            for (int i = j + 1; i < n; ++i) {
                basis.push_back({{i, j, s}, {j, i, s}});
                basis.push_back({{i, j, cd(0.0, s)}, {j, i, cd(0.0, -s)}});
            }
        }
        return basis;
    }

    const ConicForm& p_;
    int rank_ = 0;
    mutable RMat factor_;
    std::vector<const SparseRow*> sparse_rows_;
    std::vector<const SparseRow*> dense_rows_;
};

/// Solves H dx = -g with Jacobi scaling and escalating regularization. Keeps
/// its work matrices between calls (they are large and the size is fixed).
class NewtonSolver {
public:
    bool operator()(const RMat& h, const RVec& g, RVec& dx) {
        const auto n = h.rows();
        d_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) d_[i] = 1.0 / std::sqrt(std::max(h(i, i), 1e-300));
        hs_.resize(n, n);
        hs_.noalias() = d_.asDiagonal() * h * d_.asDiagonal();
        rhs_ = -(d_.array() * g.array()).matrix();
        double reg = 0.0;
        for (int attempt = 0; attempt < 12; ++attempt) {
            if (reg > 0.0) hs_.diagonal().array() += reg;
            llt_.compute(hs_);
            if (llt_.info() == Eigen::Success) {
                dx = (d_.array() * llt_.solve(rhs_).array()).matrix();
                if (dx.allFinite()) return true;
            }
            if (reg > 0.0) hs_.diagonal().array() -= reg;
            reg = reg == 0.0 ? 1e-14 : reg * 100.0;
        }
        return false;
    }

private:
    RVec d_;
    RVec rhs_;
    RMat hs_;
    Eigen::LLT<RMat> llt_;
};

struct PathResult {
    RVec x;
    bool converged = false;
    bool stalled = false;
    bool early_exit = false;
    double gap = kInf;
    int steps = 0;
    std::string note;
};

/// Barrier path following from a strictly feasible x. `early_stop` is checked
/// after every Newton step, `center_stop(x, gap)` at every centered point.
template <typename Stop, typename CenterStop>
PathResult follow_path(const ConicForm& p, const RVec& x0, const SolverSettings& st, Stop early_stop,
                       CenterStop center_stop) {
    Barrier barrier(p);
    NewtonSolver newton_direction;
    const double nu = std::max(1.0, p.barrier_parameter());
    PathResult out;
    out.x = x0;
    RVec& x = out.x;
    RVec grad;
    RMat hess;
    RVec dx;

    const bool has_objective = p.c.size() == p.n && p.c.squaredNorm() > 0.0;
    if (!has_objective) {
        out.converged = true;
        out.gap = 0.0;
        return out;
    }

    // initial t from the least-squares fit of the centering condition
    barrier.derivatives(x, grad, hess);
    double t = 1.0;
    {
        RVec hc, hg;
        if (newton_direction(hess, -p.c, hc) && newton_direction(hess, -grad, hg)) {
            const double num = -p.c.dot(hg);
            const double den = p.c.dot(hc);
            if (std::isfinite(num) && std::isfinite(den) && den > 0.0 && num > 0.0) t = num / den;
        }
        const double floor_t = nu / (1e6 * std::max(1.0, std::abs(p.c.dot(x) + p.c0)));
        t = std::clamp(t, floor_t, 1e12);
    }

    double centered_gap = kInf;
    double growth = st.barrier_growth;
    RVec x_centered = x;
    double t_centered = 0.0;
    while (out.steps < st.max_newton) {
        // centering
        bool centered = false;
        double last_dec2 = 0.0;
        int inner = 0;
        for (; inner < st.max_centering && out.steps < st.max_newton; ++inner) {
            barrier.derivatives(x, grad, hess);
            const RVec g = t * p.c + grad;
            if (!newton_direction(hess, g, dx)) {
                out.stalled = true;
                out.note = "singular Newton system";
                break;
            }
            const double dec2 = -g.dot(dx);
            if (!(dec2 >= 0.0) || dec2 / 2.0 <= st.newton_tol) {
                centered = true;
                last_dec2 = std::max(0.0, dec2);
                break;
            }
            const double f0 = t * p.c.dot(x) + barrier.value(x);
            double alpha = barrier.row_step_limit(x, dx);
            bool accepted = false;
            while (alpha > 1e-14) {
                const RVec xn = x + alpha * dx;
                const double phi = barrier.value(xn);
                if (std::isfinite(phi)) {
                    const double f1 = t * p.c.dot(xn) + phi;
                    if (f1 <= f0 - 0.01 * alpha * dec2 + 1e-13 * std::abs(f0)) {
                        x = xn;
                        accepted = true;
                        // nearly linear along dx: keep stepping while it pays
                        double best = f1;
                        while (alpha >= 1.0 && alpha < 1024.0 && f0 - best >= 0.6 * alpha * dec2) {
                            const RVec xe = x + alpha * dx;
                            const double pe = barrier.value(xe);
                            if (!std::isfinite(pe)) break;
                            const double fe = t * p.c.dot(xe) + pe;
                            if (fe >= best) break;
                            best = fe;
                            x = xe;
                            alpha *= 2.0;
                        }
                        break;
                    }
                }
                alpha *= 0.5;
            }
            ++out.steps;
            if (st.verbose && std::getenv("ISCSC_SOLVER_TRACE"))
            {
                Eigen::Index im;
                (dx.array().abs() / (x.array().abs() + 1e-3)).maxCoeff(&im);
                std::cerr << "[barrier]     dec2=" << dec2 << " alpha=" << alpha << " f0=" << f0 << " imax=" << im
                          << " x=" << x[im] << " dx=" << dx[im] << "\n";
            }
            if (dec2 < 1e-3 && (!accepted || alpha < 1e-3)) {
                // the merit can no longer resolve the remaining decrement
                centered = true;
                last_dec2 = dec2;
                break;
            }
            if (!accepted) {
                out.stalled = true;
                out.note = "line search failed";
                break;
            }
            if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 1e14) {
                out.stalled = true;
                out.note = "iterates diverged (unbounded problem?)";
                return out;
            }
            if (early_stop(x)) {
                out.early_exit = true;
                return out;
            }
        }
        if (!centered && !out.stalled && inner >= st.max_centering) {
            out.stalled = true;
            out.note = "centering did not converge";
        }
        out.gap = (nu + std::sqrt(nu * last_dec2)) / t;
        const double scale = std::max(1.0, std::abs(p.c.dot(x) + p.c0));
        if (st.verbose)
            std::cerr << "[barrier]   t=" << t << " obj=" << p.c.dot(x) + p.c0 << " gap=" << out.gap
                      << " steps=" << out.steps << (centered ? "" : " (not centered)") << "\n";
        if (centered) {
            centered_gap = out.gap;
            x_centered = x;
            t_centered = t;
        } else if (centered_gap <= 10.0 * st.tol * scale) {
            // close enough already; do not spend the budget on backing off
            x = x_centered;
            out.gap = centered_gap;
            out.converged = true;
            out.note.clear();
            return out;
        } else if (t_centered > 0.0 && growth > 1.05 && out.steps < st.max_newton) {
            // back off to the last centered point with a shorter step in t
            out.stalled = false;
            out.note.clear();
            x = x_centered;
            growth = std::sqrt(growth);
            t = t_centered * growth;
            continue;
        }
        if (out.stalled) {
            // accept a stall once the last centered point is close enough
            out.gap = centered_gap;
            if (centered_gap <= 10.0 * st.tol * scale) out.converged = true;
            return out;
        }
        if (centered && out.gap <= st.tol * scale) {
            out.converged = true;
            return out;
        }
        if (centered && center_stop(x, out.gap)) return out;

        // adapt the growth to how hard the last centering was
        if (inner > 25) growth = std::max(2.0, growth / 2.0);
        else if (inner < 8) growth = std::min(st.barrier_growth, growth * 2.0);
        const double t_next = t * growth;

        // predictor along the central path tangent, dx/dt = -H^{-1} c
        barrier.derivatives(x, grad, hess);
        RVec tangent;
        if (newton_direction(hess, p.c, tangent)) {
            const RVec step = (t_next - t) * tangent;
            const double merit0 = t_next * p.c.dot(x) + barrier.value(x);
            for (double beta = 1.0; beta > 1e-3; beta *= 0.5) {
                const RVec xn = x + beta * step;
                const double phi = barrier.value(xn);
                if (std::isfinite(phi) && t_next * p.c.dot(xn) + phi < merit0) {
                    x = xn;
                    break;
                }
            }
        }
        t = t_next;
    }
    out.note = "Newton step budget exhausted";
    if (centered_gap <= 10.0 * st.tol * std::max(1.0, std::abs(p.c.dot(x_centered) + p.c0))) {
        x = x_centered;
        out.gap = centered_gap;
        out.converged = true;
        out.note.clear();
    }
    return out;
}

struct Reduced {
    ConicForm form;
    RVec x_particular;
    RMat nullspace;  // x = x_particular + nullspace * y
    bool trivial = true;
};

/// Dense matrix of every variable's coefficient in a block.
std::map<int, RMat> block_coefficients(const LmiBlock& b) {
    std::map<int, RMat> out;
    auto slot = [&](int var) -> RMat& {
        auto it = out.find(var);
        if (it == out.end()) it = out.emplace(var, RMat::Zero(b.dim, b.dim)).first;
        return it->second;
    };
    for (const auto& st : b.scalars) add_sym(slot(st.var), st.entries, 1.0);
    for (const auto& ct : b.congruences) {
        const auto& basis = embedded_basis(ct.n);
        for (std::size_t i = 0; i < basis.size(); ++i) {
            RMat e = RMat::Zero(2 * ct.n, 2 * ct.n);
            for (const auto& be : basis[i]) e(be.row, be.col) += be.value;
            slot(ct.offset + static_cast<int>(i)) += ct.coeff * (ct.q->transpose() * e * (*ct.q));
        }
    }
    return out;
}

SparseRow map_row(const SparseRow& r, const RVec& xp, const RMat& z) {
    SparseRow out;
    out.constant = r.eval(xp);
    RVec coef = RVec::Zero(z.cols());
    for (std::size_t i = 0; i < r.index.size(); ++i) coef += r.value[i] * z.row(r.index[i]).transpose();
    for (Eigen::Index j = 0; j < coef.size(); ++j)
        if (coef[j] != 0.0) {
            out.index.push_back(static_cast<int>(j));
            out.value.push_back(coef[j]);
        }
    return out;
}

/// Eliminates equalities through x = x_p + Z y. Returns false if inconsistent.
bool reduce(const ConicForm& p, Reduced& red, std::string& why) {
    if (p.equalities.empty()) {
        red.trivial = true;
        return true;
    }
    red.trivial = false;
    const auto m = static_cast<Eigen::Index>(p.equalities.size());
    RMat a = RMat::Zero(m, p.n);
    RVec rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& r = p.equalities[i];
        for (std::size_t k = 0; k < r.index.size(); ++k) a(i, r.index[k]) += r.value[k];
        rhs[i] = -r.constant;
    }
    Eigen::CompleteOrthogonalDecomposition<RMat> cod(a);
    red.x_particular = cod.solve(rhs);
    if ((a * red.x_particular - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) {
        why = "inconsistent equality constraints";
        return false;
    }
    const auto rank = cod.rank();
    Eigen::HouseholderQR<RMat> qr(a.transpose());
    const RMat q = qr.householderQ() * RMat::Identity(p.n, p.n);
    red.nullspace = q.rightCols(p.n - rank);

    const RVec& xp = red.x_particular;
    const RMat& z = red.nullspace;
    ConicForm& f = red.form;
    f.n = static_cast<int>(z.cols());
    f.c = z.transpose() * p.c;
    f.c0 = p.c0 + p.c.dot(xp);
    for (const auto& r : p.rows) f.rows.push_back(map_row(r, xp, z));
    for (const auto& h : p.hypographs) f.hypographs.push_back({map_row(h.upper, xp, z), map_row(h.arg, xp, z)});
    for (const auto& b : p.blocks) {
        LmiBlock nb;
        nb.dim = b.dim;
        nb.tag = b.tag;
        nb.complex_dim = b.complex_dim;
        nb.constant = p.block_value(b, xp);
        const auto coeffs = block_coefficients(b);
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
            RMat g = RMat::Zero(b.dim, b.dim);
            for (const auto& [var, mat] : coeffs)
                if (z(var, j) != 0.0) g += z(var, j) * mat;
            ScalarTerm st{static_cast<int>(j), {}};
            for (int c = 0; c < b.dim; ++c)
                for (int r = c; r < b.dim; ++r)
                    if (std::abs(g(r, c)) > 1e-15) st.entries.push_back({r, c, g(r, c)});
            if (!st.entries.empty()) nb.scalars.push_back(std::move(st));
        }
        f.blocks.push_back(std::move(nb));
    }
    if (p.hint.size() == p.n) f.hint = z.transpose() * (p.hint - xp);
    return true;
}

/// Minimum slack of x: positive iff strictly feasible.
double min_slack(const ConicForm& p, const RVec& x) {
    double slack = kInf;
    for (const auto& r : p.rows) slack = std::min(slack, r.eval(x));
    for (const auto& h : p.hypographs) {
        const double a = h.arg.eval(x);
        slack = std::min(slack, a);
        if (a > 0.0) slack = std::min(slack, std::log(a) - h.upper.eval(x));
    }
    for (const auto& b : p.blocks) {
        if (b.dim == 0) continue;
        Eigen::SelfAdjointEigenSolver<RMat> es(p.block_value(b, x), Eigen::EigenvaluesOnly);
        slack = std::min(slack, es.eigenvalues().minCoeff());
    }
    return slack;
}

/// Phase I: minimize tau over {x, tau : constraints relaxed by tau}.
/// Returns true and a strictly feasible x when tau < 0 is reached.
bool phase_one(const ConicForm& p, const RVec& x0, double box, const SolverSettings& st, RVec& x_out, int& steps,
               std::string& note) {
    const int n = p.n;
    const int tau = n;
    ConicForm f;
    f.n = n + 1;
    f.c = RVec::Zero(n + 1);
    f.c[tau] = 1.0;
    for (auto r : p.rows) {
        r.index.push_back(tau);
        r.value.push_back(1.0);
        f.rows.push_back(std::move(r));
    }
    for (auto h : p.hypographs) {
        h.arg.index.push_back(tau);
        h.arg.value.push_back(1.0);
        h.upper.index.push_back(tau);
        h.upper.value.push_back(-1.0);
        f.hypographs.push_back(std::move(h));
    }
    for (auto b : p.blocks) {
        ScalarTerm st_tau{tau, {}};
        for (int i = 0; i < b.dim; ++i) st_tau.entries.push_back({i, i, 1.0});
        b.scalars.push_back(std::move(st_tau));
        f.blocks.push_back(std::move(b));
    }
    const double radius = box * (1.0 + x0.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < n; ++i) {
        f.rows.push_back({{i}, {1.0}, radius - x0[i]});
        f.rows.push_back({{i}, {-1.0}, radius + x0[i]});
    }

    RVec z(n + 1);
    z.head(n) = x0;
    const double deficit = std::max(0.0, -min_slack(p, x0));
    double t0 = 2.0 * deficit + 1.0;
    z[tau] = t0;
    for (int grow = 0; grow < 60 && !std::isfinite(Barrier(f).value(z)); ++grow) {
        t0 *= 2.0;
        z[tau] = t0;
    }
    if (!std::isfinite(Barrier(f).value(z))) {
        note = "phase I could not find a starting point";
        return false;
    }
    SolverSettings s1 = st;
    s1.tol = 1e-12;
    // tau - gap bounds the optimal tau from below: positive means infeasible
    const auto res = follow_path(
        f, z, s1, [&](const RVec& v) { return v[tau] < 0.0; },
        [&](const RVec& v, double gap) { return v[tau] - gap > 1e-12 * (1.0 + std::abs(v[tau])); });
    steps += res.steps;
    if (res.early_exit) {
        x_out = res.x.head(n);
        return true;
    }
    std::ostringstream os;
    os << "phase I ended with tau = " << res.x[tau];
    if (!res.note.empty()) os << " (" << res.note << ")";
    note = os.str();
    return false;
}

}  // namespace

ConicResult BarrierBackend::solve(const ConicForm& problem, const SolverSettings& settings) const {
    const auto start = std::chrono::steady_clock::now();
    ConicResult out;
    auto finish = [&](ConicResult& r) -> ConicResult {
        r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return r;
    };

    Reduced red;
    std::string why;
    if (!reduce(problem, red, why)) {
        out.status = SolveStatus::Infeasible;
        out.diagnostics = why;
        return finish(out);
    }
    const ConicForm& p = red.trivial ? problem : red.form;
    auto lift = [&](const RVec& y) -> RVec {
        return red.trivial ? y : RVec(red.x_particular + red.nullspace * y);
    };

    RVec x0 = p.hint.size() == p.n ? p.hint : RVec::Zero(p.n);
    if (!(min_slack(p, x0) > 0.0) || !std::isfinite(Barrier(p).value(x0))) {
        // a tight box keeps phase I near the hint; the wide one decides infeasibility
        RVec x1;
        bool found = phase_one(p, x0, 1e2, settings, x1, out.phase1_steps, why);
        if (!found) found = phase_one(p, x0, 1e7, settings, x1, out.phase1_steps, why);
        if (!found) {
            out.status = SolveStatus::Infeasible;
            out.x = lift(x0);
            out.diagnostics = why;
            return finish(out);
        }
        x0 = x1;
    }

    const auto res = follow_path(
        p, x0, settings, [](const RVec&) { return false; }, [](const RVec&, double) { return false; });
    out.x = lift(res.x);
    out.newton_steps = res.steps;
    out.gap_bound = res.gap;
    out.objective = problem.c.size() == problem.n ? problem.c.dot(out.x) + problem.c0 : problem.c0;
    out.status = res.converged ? SolveStatus::Optimal : SolveStatus::NumericalLimit;
    out.diagnostics = res.note;
    if (settings.verbose)
        std::cerr << "[barrier] n=" << problem.n << " status=" << to_string(out.status)
                  << " newton=" << out.newton_steps << " phase1=" << out.phase1_steps
                  << " gap=" << out.gap_bound << "\n";
    return finish(out);
}

}  // namespace iscsc::sdp
