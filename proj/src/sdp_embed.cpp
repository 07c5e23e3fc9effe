// SPDX-License-Identifier: Apache-2.0
#include "iscsc/sdp/embed.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace iscsc::sdp {

namespace {
constexpr double kSqrt2 = 1.41421356237309504880;
}

RMat embed_complex(const CMat& m) {
    const auto r = m.rows();
    const auto c = m.cols();
    RMat out(2 * r, 2 * c);
    out.topLeftCorner(r, c) = m.real();
    out.topRightCorner(r, c) = -m.imag();
    out.bottomLeftCorner(r, c) = m.imag();
    out.bottomRightCorner(r, c) = m.real();
    return out;
}

RMat embed_hermitian(const CMat& h) {
    require_hermitian(h, "embedded matrix");
    return embed_complex(0.5 * (h + h.adjoint()));
}

CMat unembed_hermitian(const RMat& m) {
    const auto n = m.rows() / 2;
    CMat out(n, n);
    out.real() = 0.5 * (m.topLeftCorner(n, n) + m.bottomRightCorner(n, n));
    out.imag() = 0.5 * (m.bottomLeftCorner(n, n) - m.topRightCorner(n, n));
    return out;
}

bool check_psd(const RMat& m, double tol) {
    if (m.rows() != m.cols()) throw DomainError("check_psd needs a square matrix");
    if (m.size() == 0) return true;
    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const double spectral = ev.cwiseAbs().maxCoeff();
    return ev.minCoeff() >= -tol * (1.0 + spectral);
}

bool check_psd(const CMat& m, double tol) {
    if (m.rows() != m.cols()) throw DomainError("check_psd needs a square matrix");
    if (m.size() == 0) return true;
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const double spectral = ev.cwiseAbs().maxCoeff();
    return ev.minCoeff() >= -tol * (1.0 + spectral);
}

int hermitian_svec_size(int n) { return n * n; }

RVec hermitian_svec(const CMat& x) {
    const int n = static_cast<int>(x.rows());
    RVec v(n * n);
    int idx = 0;
    for (int j = 0; j < n; ++j) {
        v[idx++] = x(j, j).real();
        for (int i = j + 1; i < n; ++i) {
            v[idx++] = kSqrt2 * x(i, j).real();
            v[idx++] = kSqrt2 * x(i, j).imag();
        }
    }
    return v;
}

CMat hermitian_smat(const double* svec, int n) {
    CMat x(n, n);
    int idx = 0;
    for (int j = 0; j < n; ++j) {
        x(j, j) = svec[idx++];
        for (int i = j + 1; i < n; ++i) {
            const cd z(svec[idx] / kSqrt2, svec[idx + 1] / kSqrt2);
            idx += 2;
            x(i, j) = z;
            x(j, i) = std::conj(z);
        }
    }
    return x;
}

const std::vector<std::vector<BasisEntry>>& embedded_basis(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<std::vector<std::vector<BasisEntry>>>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[n];
    if (slot) return *slot;
    auto basis = std::make_unique<std::vector<std::vector<BasisEntry>>>();
    basis->reserve(static_cast<std::size_t>(n) * n);
    const double s = 1.0 / kSqrt2;
    for (int j = 0; j < n; ++j) {
        basis->push_back({{j, j, 1.0}, {n + j, n + j, 1.0}});
        for (int i = j + 1; i < n; ++i) {
            // real part: symmetric in both diagonal blocks
            basis->push_back({{i, j, s}, {j, i, s}, {n + i, n + j, s}, {n + j, n + i, s}});
            // imaginary part: Im B has +s at (i,j) and -s at (j,i); it sits in
            // the lower-left block and its negation in the upper-right block
            basis->push_back({{n + i, j, s}, {n + j, i, -s}, {i, n + j, -s}, {j, n + i, s}});
        }
    }
    slot = std::move(basis);
    return *slot;
}

}  // namespace iscsc::sdp
