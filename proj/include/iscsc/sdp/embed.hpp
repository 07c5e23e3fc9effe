// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "iscsc/types.hpp"

#include <vector>

namespace iscsc::sdp {

/// Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.
/// Eigenvalues are those of H, each with multiplicity two.
/// Throws DomainError if H is not Hermitian within 1e-9.
RMat embed_hermitian(const CMat& h);

/// Real embedding of an arbitrary complex matrix (same block layout); it maps
/// products to products, so embed(P^H X P) = embed(P)^T embed(X) embed(P).
RMat embed_complex(const CMat& m);

/// Inverse of embed_hermitian.
CMat unembed_hermitian(const RMat& m);

/// min eigenvalue >= -tol * (1 + spectral norm).
bool check_psd(const RMat& m, double tol);
bool check_psd(const CMat& m, double tol);

// Scalarization of an n x n Hermitian matrix into n^2 reals: columns of the
// lower triangle in order; a diagonal entry contributes X_jj, an off-diagonal
// entry X_ij (i > j) contributes (sqrt2 Re X_ij, sqrt2 Im X_ij). The scaling
// makes svec(X) . svec(Y) = Re tr(X Y).

int hermitian_svec_size(int n);
RVec hermitian_svec(const CMat& x);
CMat hermitian_smat(const double* svec, int n);
inline CMat hermitian_smat(const RVec& svec, int n) { return hermitian_smat(svec.data(), n); }

/// Nonzero of an embedded basis matrix, listed over the full (both-triangle) pattern.
struct BasisEntry {
    int row;
    int col;
    double value;
};

/// Real embedding of each Hermitian basis matrix B_i, in svec order.
const std::vector<std::vector<BasisEntry>>& embedded_basis(int n);

}  // namespace iscsc::sdp
