// SPDX-License-Identifier: Apache-2.0
#include "iscsc/sdp/model.hpp"
#include "iscsc/sdp/embed.hpp"

#include <cmath>
#include <cstdlib>
#include <ostream>

namespace iscsc::sdp {

AffineExpr AffineExpr::variable(int index, double coeff) {
    AffineExpr e;
    if (coeff != 0.0) e.terms_[index] = coeff;
    return e;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
    constant_ += o.constant_;
    for (const auto& [k, v] : o.terms_) {
        auto [it, inserted] = terms_.try_emplace(k, v);
        if (!inserted) {
            it->second += v;
            if (it->second == 0.0) terms_.erase(it);
        }
    }
    return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& o) { return *this += -o; }

AffineExpr& AffineExpr::operator*=(double s) {
    constant_ *= s;
    if (s == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& kv : terms_) kv.second *= s;
    return *this;
}

double AffineExpr::evaluate(const RVec& x) const {
    double v = constant_;
    for (const auto& [k, c] : terms_) v += c * x[k];
    return v;
}

AffineExpr HermitianVar::inner(const CMat& m) const {
    if (m.rows() != dim || m.cols() != dim) throw DomainError("inner: shape mismatch");
    const RVec coeffs = hermitian_svec(0.5 * (m + m.adjoint()));
    AffineExpr e;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i)
        if (coeffs[i] != 0.0) e += AffineExpr::variable(offset + static_cast<int>(i), coeffs[i]);
    return e;
}

AffineExpr HermitianVar::trace() const { return inner(CMat::Identity(dim, dim)); }

CMat SolveOutcome::value(const HermitianVar& v) const { return hermitian_smat(x.data() + v.offset, v.dim); }

void ComplexLmi::add_constant(const CMat& c) {
    require_hermitian(c, "LMI constant");
    constant_ += c;
}

void ComplexLmi::add_scalar(const AffineExpr& e, const CMat& f) {
    if (f.rows() != dim_ || f.cols() != dim_) throw DomainError("LMI coefficient has the wrong shape");
    require_hermitian(f, "LMI coefficient");
    scalars_.emplace_back(e, f);
}

void ComplexLmi::add_congruence(const HermitianVar& x, const CMat& p, double coeff) {
    if (p.rows() != x.dim || p.cols() != dim_) throw DomainError("congruence factor has the wrong shape");
    std::size_t idx = 0;
    while (idx < projections_.size() && !(projections_[idx].rows() == p.rows() && projections_[idx] == p)) ++idx;
    if (idx == projections_.size()) projections_.push_back(p);
    congruences_.push_back({x, idx, coeff});
}

void RealLmi::set(int i, int j, const AffineExpr& e) {
    if (i < j) std::swap(i, j);
    if (i >= dim_ || j < 0) throw DomainError("RealLmi index out of range");
    entries_[static_cast<std::size_t>(i) * dim_ + j] = e;
}

const AffineExpr& RealLmi::at(int i, int j) const {
    if (i < j) std::swap(i, j);
    return entries_[static_cast<std::size_t>(i) * dim_ + j];
}

ScalarVar SdpProblem::add_scalar(std::string name, double lower, double upper) {
    ScalarVar v{n_++};
    names_.push_back(std::move(name));
    if (lower > -kUnbounded) add_linear(v, Sense::Ge, lower, names_.back() + ".lower");
    if (upper < kUnbounded) add_linear(v, Sense::Le, upper, names_.back() + ".upper");
    return v;
}

HermitianVar SdpProblem::add_hermitian(int n, VarRole role, bool psd) {
    if (n <= 0) throw DomainError("Hermitian variable needs a positive size");
    HermitianVar v{n_, n, role};
    n_ += n * n;
    for (int i = 0; i < n * n; ++i) names_.push_back("X" + std::to_string(hermitians_.size()));
    hermitians_.push_back(v);
    if (psd) add_psd(v);
    return v;
}

void SdpProblem::add_linear(const AffineExpr& lhs, Sense sense, const AffineExpr& rhs, std::string tag) {
    switch (sense) {
        case Sense::Ge: linear_.push_back({lhs - rhs, false, std::move(tag)}); break;
        case Sense::Le: linear_.push_back({rhs - lhs, false, std::move(tag)}); break;
        case Sense::Eq: linear_.push_back({lhs - rhs, true, std::move(tag)}); break;
    }
}

void SdpProblem::add_psd(const HermitianVar& x) {
    for (std::size_t i = 0; i < hermitians_.size(); ++i)
        if (hermitians_[i].offset == x.offset) {
            psd_vars_.push_back(static_cast<int>(i));
            order_.emplace_back(BlockKind::Psd, psd_vars_.size() - 1);
            return;
        }
    throw DomainError("add_psd: variable is not declared in this problem");
}

void SdpProblem::add_lmi(ComplexLmi lmi, std::string tag) {
    complex_lmis_.emplace_back(std::move(lmi), std::move(tag));
    order_.emplace_back(BlockKind::Complex, complex_lmis_.size() - 1);
}

void SdpProblem::add_lmi(RealLmi lmi, std::string tag) {
    real_lmis_.emplace_back(std::move(lmi), std::move(tag));
    order_.emplace_back(BlockKind::Real, real_lmis_.size() - 1);
}

void SdpProblem::add_log_hypograph(const AffineExpr& s, const AffineExpr& a) { hypographs_.emplace_back(s, a); }

ScalarVar SdpProblem::epigraph_inverse(const AffineExpr& u, double v_upper) {
    const ScalarVar v = add_scalar("inv", -kUnbounded, v_upper);
    RealLmi blk(2);
    blk.set(0, 0, v);
    blk.set(1, 0, 1.0);
    blk.set(1, 1, u);
    add_lmi(std::move(blk), "epigraph");
    return v;
}

void SdpProblem::hint(ScalarVar v, double value) { hint_[v.index] = value; }

void SdpProblem::hint(const HermitianVar& v, const CMat& value) {
    const RVec s = hermitian_svec(0.5 * (value + value.adjoint()));
    for (Eigen::Index i = 0; i < s.size(); ++i) hint_[v.offset + static_cast<int>(i)] = s[i];
}

int SdpProblem::num_blocks() const { return static_cast<int>(order_.size()); }

std::vector<std::pair<std::string, int>> SdpProblem::block_shapes() const {
    std::vector<std::pair<std::string, int>> out;
    for (const auto& [kind, idx] : order_) {
        switch (kind) {
            case BlockKind::Psd: out.emplace_back("psd", hermitians_[psd_vars_[idx]].dim); break;
            case BlockKind::Complex:
                out.emplace_back(complex_lmis_[idx].second, complex_lmis_[idx].first.dim());
                break;
            case BlockKind::Real: out.emplace_back(real_lmis_[idx].second, real_lmis_[idx].first.dim()); break;
        }
    }
    return out;
}

namespace {

SparseRow to_row(const AffineExpr& e) {
    SparseRow r;
    r.constant = e.constant();
    for (const auto& [k, v] : e.terms()) {
        r.index.push_back(k);
        r.value.push_back(v);
    }
    return r;
}

void append_dense_terms(LmiBlock& b, const std::map<int, RMat>& per_var) {
    for (const auto& [var, m] : per_var) {
        ScalarTerm st{var, {}};
        for (int c = 0; c < m.cols(); ++c)
            for (int r = c; r < m.rows(); ++r)
                if (m(r, c) != 0.0) st.entries.push_back({r, c, m(r, c)});
        if (!st.entries.empty()) b.scalars.push_back(std::move(st));
    }
}

}  // namespace

ConicForm SdpProblem::compile() const {
    ConicForm f;
    f.n = n_;
    f.c = RVec::Zero(n_);
    for (const auto& [k, v] : objective_.terms()) f.c[k] = -v;
    f.c0 = -objective_.constant();

    for (const auto& l : linear_) (l.equality ? f.equalities : f.rows).push_back(to_row(l.expr));
    for (const auto& [s, a] : hypographs_) f.hypographs.push_back({to_row(s), to_row(a)});

    std::map<int, std::shared_ptr<const RMat>> identities;
    for (const auto& [kind, idx] : order_) {
        LmiBlock b;
        if (kind == BlockKind::Psd) {
            const auto& v = hermitians_[psd_vars_[idx]];
            auto& id = identities[v.dim];
            if (!id) id = std::make_shared<const RMat>(RMat::Identity(2 * v.dim, 2 * v.dim));
            b.dim = 2 * v.dim;
            b.complex_dim = v.dim;
            b.constant = RMat::Zero(b.dim, b.dim);
            b.congruences.push_back({v.offset, v.dim, 1.0, id});
            b.tag = "psd";
        } else if (kind == BlockKind::Complex) {
            const auto& [lmi, tag] = complex_lmis_[idx];
            b.dim = 2 * lmi.dim_;
            b.complex_dim = lmi.dim_;
            b.tag = tag;
            b.constant = embed_complex(lmi.constant_);
            std::map<int, RMat> per_var;
            for (const auto& [e, fm] : lmi.scalars_) {
                const RMat fe = embed_complex(fm);
                b.constant += e.constant() * fe;
                for (const auto& [var, coeff] : e.terms()) {
                    auto it = per_var.find(var);
                    if (it == per_var.end()) it = per_var.emplace(var, RMat::Zero(b.dim, b.dim)).first;
                    it->second += coeff * fe;
                }
            }
            append_dense_terms(b, per_var);
            std::vector<std::shared_ptr<const RMat>> qs;
            for (const auto& p : lmi.projections_) qs.push_back(std::make_shared<const RMat>(embed_complex(p)));
            for (const auto& c : lmi.congruences_) b.congruences.push_back({c.var.offset, c.var.dim, c.coeff, qs[c.p_index]});
        } else {
            const auto& [lmi, tag] = real_lmis_[idx];
            b.dim = lmi.dim();
            b.tag = tag;
            b.constant = RMat::Zero(b.dim, b.dim);
            std::map<int, RMat> per_var;
            for (int i = 0; i < b.dim; ++i)
                for (int j = 0; j <= i; ++j) {
                    const auto& e = lmi.at(i, j);
                    b.constant(i, j) = b.constant(j, i) = e.constant();
                    for (const auto& [var, coeff] : e.terms()) {
                        auto it = per_var.find(var);
                        if (it == per_var.end()) it = per_var.emplace(var, RMat::Zero(b.dim, b.dim)).first;
                        it->second(i, j) += coeff;
                        if (i != j) it->second(j, i) += coeff;
                    }
                }
            append_dense_terms(b, per_var);
        }
        f.blocks.push_back(std::move(b));
    }

    if (!hint_.empty()) {
        f.hint = RVec::Zero(n_);
        for (const auto& [k, v] : hint_) f.hint[k] = v;
    }
    return f;
}

SolveOutcome solve(const SdpProblem& problem, double tol, const ConicBackend& backend) {
    const ConicForm form = problem.compile();
    SolverSettings settings;
    settings.tol = tol;
    settings.verbose = std::getenv("ISCSC_SOLVER_VERBOSE") != nullptr;
    const ConicResult r = backend.solve(form, settings);
    SolveOutcome out;
    out.status = r.status;
    out.x = r.x;
    out.objective = -r.objective;
    out.iterations = r.newton_steps + r.phase1_steps;
    out.wall_seconds = r.wall_seconds;
    out.gap_bound = r.gap_bound;
    out.diagnostics = r.diagnostics;
    if (out.status == SolveStatus::Optimal) {
        for (const auto& b : form.blocks) {
            if (!check_psd(form.block_value(b, out.x), 1e-6)) {
                out.status = SolveStatus::NumericalLimit;
                out.diagnostics = "block '" + b.tag + "' left the PSD cone";
                break;
            }
        }
    }
    return out;
}

void write_problem(const ConicForm& form, std::ostream& os) {
    os.precision(17);
    os << "sdp " << form.n << ' ' << form.rows.size() << ' ' << form.equalities.size() << ' ' << form.blocks.size()
       << ' ' << form.hypographs.size() << '\n';
    for (Eigen::Index i = 0; i < form.c.size(); ++i)
        if (form.c[i] != 0.0) os << "c " << i << ' ' << form.c[i] << '\n';
    os << "c0 " << form.c0 << '\n';
    auto rows = [&](const std::vector<SparseRow>& rs, const char* tag) {
        for (std::size_t k = 0; k < rs.size(); ++k) {
            for (std::size_t i = 0; i < rs[k].index.size(); ++i)
                os << tag << ' ' << k << ' ' << rs[k].index[i] << ' ' << rs[k].value[i] << '\n';
            os << tag << "c " << k << ' ' << rs[k].constant << '\n';
        }
    };
    rows(form.rows, "r");
    rows(form.equalities, "e");
    for (std::size_t k = 0; k < form.blocks.size(); ++k) {
        const auto& b = form.blocks[k];
        os << "b " << k << ' ' << b.dim << '\n';
        auto dump = [&](int var, const RMat& m) {
            for (int c = 0; c < m.cols(); ++c)
                for (int r = c; r < m.rows(); ++r)
                    if (m(r, c) != 0.0) os << "f " << k << ' ' << var << ' ' << r << ' ' << c << ' ' << m(r, c) << '\n';
        };
        dump(-1, b.constant);
        for (const auto& st : b.scalars)
            for (const auto& e : st.entries)
                os << "f " << k << ' ' << st.var << ' ' << e.row << ' ' << e.col << ' ' << e.value << '\n';
        for (const auto& ct : b.congruences) {
            const auto& basis = embedded_basis(ct.n);
            for (std::size_t i = 0; i < basis.size(); ++i) {
                RMat e = RMat::Zero(2 * ct.n, 2 * ct.n);
                for (const auto& be : basis[i]) e(be.row, be.col) += be.value;
                dump(ct.offset + static_cast<int>(i), ct.coeff * (ct.q->transpose() * e * (*ct.q)));
            }
        }
    }
    for (std::size_t k = 0; k < form.hypographs.size(); ++k) {
        const auto& h = form.hypographs[k];
        for (std::size_t i = 0; i < h.upper.index.size(); ++i)
            os << "h " << k << " u " << h.upper.index[i] << ' ' << h.upper.value[i] << '\n';
        os << "hc " << k << " u " << h.upper.constant << '\n';
        for (std::size_t i = 0; i < h.arg.index.size(); ++i)
            os << "h " << k << " a " << h.arg.index[i] << ' ' << h.arg.value[i] << '\n';
        os << "hc " << k << " a " << h.arg.constant << '\n';
    }
}

}  // namespace iscsc::sdp
