// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "iscsc/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace iscsc::sdp {

/// Sparse affine function a^T x + constant.
struct SparseRow {
    std::vector<int> index;
    std::vector<double> value;
    double constant = 0.0;

    double eval(const RVec& x) const {
        double s = constant;
        for (std::size_t i = 0; i < index.size(); ++i) s += value[i] * x[index[i]];
        return s;
    }
    double dot(const RVec& d) const {
        double s = 0.0;
        for (std::size_t i = 0; i < index.size(); ++i) s += value[i] * d[index[i]];
        return s;
    }
};

/// Entry of a symmetric matrix, stored for the lower triangle (row >= col).
struct SymEntry {
    int row;
    int col;
    double value;
};

/// x_var * F, F sparse symmetric.
struct ScalarTerm {
    int var;
    std::vector<SymEntry> entries;
};

/// coeff * Q^T embed(X) Q, where X is the Hermitian matrix scalarized in
/// x[offset, offset + n^2) and Q is 2n x dim. Terms that share the same Q
/// object share Hessian work.
struct CongruenceTerm {
    int offset;
    int n;
    double coeff;
    std::shared_ptr<const RMat> q;
};

/// Linear matrix inequality constant + sum of terms >= 0 (real symmetric).
struct LmiBlock {
    int dim = 0;
    RMat constant;
    std::vector<ScalarTerm> scalars;
    std::vector<CongruenceTerm> congruences;
    std::string tag;
    int complex_dim = 0;  // size of the Hermitian block it embeds, 0 for a real block
};

/// upper(x) <= ln(arg(x)), arg(x) > 0.
struct LogHypograph {
    SparseRow upper;
    SparseRow arg;
};

/// Standard form handed to a backend:
///   minimize c^T x + c0  s.t.  rows(x) >= 0, equalities(x) = 0, blocks(x) PSD,
///   log hypographs.
struct ConicForm {
    int n = 0;
    RVec c;
    double c0 = 0.0;
    std::vector<SparseRow> rows;
    std::vector<SparseRow> equalities;
    std::vector<LmiBlock> blocks;
    std::vector<LogHypograph> hypographs;
    RVec hint;  // optional starting point (size 0 or n)

    /// Barrier parameter: sum of block dims + rows + 2 per hypograph.
    double barrier_parameter() const;
    RMat block_value(const LmiBlock& b, const RVec& x) const;
};

enum class SolveStatus { Optimal, Infeasible, NumericalLimit };

const char* to_string(SolveStatus s);

struct SolverSettings {
    double tol = 1e-8;          // relative duality-gap target
    double barrier_growth = 6.0;
    int max_newton = 600;
    double newton_tol = 1e-7;   // Newton decrement^2 / 2 to stop centering
    int max_centering = 60;     // Newton steps per centering before declaring a stall
    bool verbose = false;
};

struct ConicResult {
    SolveStatus status = SolveStatus::NumericalLimit;
    RVec x;
    double objective = 0.0;  // c^T x + c0
    double gap_bound = 0.0;  // nu / t at termination
    int newton_steps = 0;
    int phase1_steps = 0;
    double wall_seconds = 0.0;
    std::string diagnostics;
};

/// Backend contract: problem in standard conic form in, result out.
class ConicBackend {
public:
    virtual ~ConicBackend() = default;
    virtual ConicResult solve(const ConicForm& problem, const SolverSettings& settings) const = 0;
    virtual std::string name() const = 0;
};

/// Primal log-barrier path-following method with a phase-I feasibility search.
class BarrierBackend final : public ConicBackend {
public:
    ConicResult solve(const ConicForm& problem, const SolverSettings& settings) const override;
    std::string name() const override { return "barrier"; }
};

}  // namespace iscsc::sdp
