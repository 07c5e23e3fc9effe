// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "iscsc/sdp/conic.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace iscsc::sdp {

/// Real affine combination of scalarized variable entries plus a constant.
class AffineExpr {
public:
    AffineExpr() = default;
    AffineExpr(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)

    static AffineExpr variable(int index, double coeff = 1.0);

    AffineExpr& operator+=(const AffineExpr& o);
    AffineExpr& operator-=(const AffineExpr& o);
    AffineExpr& operator*=(double s);
    AffineExpr operator-() const { return AffineExpr(*this) *= -1.0; }

    friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
    friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
    friend AffineExpr operator*(AffineExpr a, double s) { return a *= s; }
    friend AffineExpr operator*(double s, AffineExpr a) { return a *= s; }

    double constant() const { return constant_; }
    const std::map<int, double>& terms() const { return terms_; }
    double evaluate(const RVec& x) const;
    bool is_constant() const { return terms_.empty(); }

private:
    std::map<int, double> terms_;
    double constant_ = 0.0;
};

struct ScalarVar {
    int index = -1;
    operator AffineExpr() const { return AffineExpr::variable(index); }  // NOLINT
};

enum class VarRole { CommBeam, SenseBeam, Other };

/// n x n Hermitian matrix variable occupying n^2 consecutive scalars.
struct HermitianVar {
    int offset = -1;
    int dim = 0;
    VarRole role = VarRole::Other;

    /// Re tr(M X); only the Hermitian part of M matters.
    AffineExpr inner(const CMat& m) const;
    AffineExpr trace() const;
};

/// Hermitian LMI  C + sum e_i(x) F_i + sum coeff P^H X P  >= 0.
class ComplexLmi {
public:
    explicit ComplexLmi(int dim) : dim_(dim), constant_(CMat::Zero(dim, dim)) {}

    void add_constant(const CMat& c);
    void add_scalar(const AffineExpr& e, const CMat& f);
    /// coeff * P^H X P with P of shape X.dim x dim.
    void add_congruence(const HermitianVar& x, const CMat& p, double coeff = 1.0);

    int dim() const { return dim_; }

private:
    friend class SdpProblem;
    struct Congruence {
        HermitianVar var;
        std::size_t p_index;
        double coeff;
    };
    int dim_;
    CMat constant_;
    std::vector<std::pair<AffineExpr, CMat>> scalars_;
    std::vector<CMat> projections_;
    std::vector<Congruence> congruences_;
};

/// Real symmetric LMI with affine entries.
class RealLmi {
public:
    explicit RealLmi(int dim) : dim_(dim), entries_(static_cast<std::size_t>(dim) * dim) {}

    /// Sets entry (i, j) and its mirror.
    void set(int i, int j, const AffineExpr& e);
    const AffineExpr& at(int i, int j) const;
    int dim() const { return dim_; }

private:
    int dim_;
    std::vector<AffineExpr> entries_;  // lower triangle used
};

enum class Sense { Le, Eq, Ge };

struct SolveOutcome {
    SolveStatus status = SolveStatus::NumericalLimit;
    RVec x;
    double objective = 0.0;  // in the maximize sense
    int iterations = 0;
    double wall_seconds = 0.0;
    double gap_bound = 0.0;
    std::string diagnostics;

    double value(ScalarVar v) const { return x[v.index]; }
    double value(const AffineExpr& e) const { return e.evaluate(x); }
    CMat value(const HermitianVar& v) const;
    bool optimal() const { return status == SolveStatus::Optimal; }
};

/// Solver-agnostic SDP: maximize a linear objective over scalar and Hermitian
/// variables subject to linear, PSD, and log-hypograph constraints.
class SdpProblem {
public:
    ScalarVar add_scalar(std::string name, double lower = -kUnbounded, double upper = kUnbounded);
    /// Adds X and, if `psd`, the constraint X >= 0.
    HermitianVar add_hermitian(int n, VarRole role = VarRole::Other, bool psd = true);

    void maximize(const AffineExpr& objective) { objective_ = objective; }
    void add_linear(const AffineExpr& lhs, Sense sense, const AffineExpr& rhs, std::string tag = {});
    void add_psd(const HermitianVar& x);
    void add_lmi(ComplexLmi lmi, std::string tag = {});
    void add_lmi(RealLmi lmi, std::string tag = {});
    /// s <= ln(a), a > 0.
    void add_log_hypograph(const AffineExpr& s, const AffineExpr& a);
    /// v with [[v, 1], [1, u]] >= 0, i.e. v >= 1/u and u > 0.
    ScalarVar epigraph_inverse(const AffineExpr& u, double v_upper = kUnbounded);

    void hint(ScalarVar v, double value);
    void hint(const HermitianVar& v, const CMat& value);

    int num_scalars() const { return n_; }
    int num_hermitian() const { return static_cast<int>(hermitians_.size()); }
    const std::vector<HermitianVar>& hermitian_vars() const { return hermitians_; }
    int num_blocks() const;
    /// Sizes of the blocks with their tags, in insertion order (complex size for Hermitian LMIs).
    std::vector<std::pair<std::string, int>> block_shapes() const;

    ConicForm compile() const;

    static constexpr double kUnbounded = 1e300;

private:
    int n_ = 0;
    std::vector<std::string> names_;
    std::vector<HermitianVar> hermitians_;
    AffineExpr objective_;
    struct Linear {
        AffineExpr expr;  // expr >= 0 or expr = 0
        bool equality;
        std::string tag;
    };
    std::vector<Linear> linear_;
    std::vector<std::pair<ComplexLmi, std::string>> complex_lmis_;
    std::vector<std::pair<RealLmi, std::string>> real_lmis_;
    std::vector<int> psd_vars_;  // indices into hermitians_
    enum class BlockKind { Psd, Complex, Real };
    std::vector<std::pair<BlockKind, std::size_t>> order_;
    std::vector<std::pair<AffineExpr, AffineExpr>> hypographs_;
    std::map<int, double> hint_;
};

SolveOutcome solve(const SdpProblem& problem, double tol, const ConicBackend& backend = BarrierBackend{});

/// Text dump: a header line "sdp <vars> <rows> <equalities> <blocks> <hypographs>",
/// then "c <var> <value>" objective triplets (minimize sense, "c0 <value>" for
/// the constant), "r <row> <var> <value>" / "rc <row> <value>" for rows >= 0,
/// "e ..." / "ec ..." for equalities, "b <block> <dim>" followed by
/// "f <block> <var> <i> <j> <value>" lower-triangle triplets (var -1 is the
/// constant), and "h <k> u|a <var> <value>" / "hc <k> u|a <value>" for
/// log hypographs upper <= ln(arg).
void write_problem(const ConicForm& form, std::ostream& os);

}  // namespace iscsc::sdp
