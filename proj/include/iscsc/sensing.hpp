// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "iscsc/scenario.hpp"
#include "iscsc/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace iscsc::sensing {

/// ULA response toward `theta_rad`: element n is exp(-j 2 pi n (d/lambda) sin theta).
/// Throws DomainError when |theta| > pi/2.
CVec steering_vector(double theta_rad, int n, double spacing_ratio);

/// Elementwise d/dtheta of steering_vector.
CVec steering_derivative(double theta_rad, int n, double spacing_ratio);

/// Fisher information for xi = [theta, Re beta, Im beta] of one target.
struct Fim {
    double j_tt = 0.0;
    Eigen::Vector2d j_tb = Eigen::Vector2d::Zero();
    double j_bb = 0.0;  // J_beta,beta = j_bb * I_2

    Eigen::Matrix3d assembled() const;
};

/// Every FIM entry is Re tr(M rx) for a Hermitian M that depends only on the
/// target geometry; the optimizer uses these to keep the CRB constraint affine.
struct FimFunctionals {
    CMat tt;
    CMat tb_re;
    CMat tb_im;
    CMat bb;

    Fim evaluate(const CMat& rx) const;
};

/// FIM of the echo model y_t = beta a a^H x_t + n_t with sample covariance rx.
/// Throws DomainError if rx is not Hermitian PSD (tolerance 1e-8) or noise <= 0.
Fim fim(double theta_rad, cd beta, const CMat& rx, int snapshots, double noise_w,
        double spacing_ratio = 0.5);

FimFunctionals fim_functionals(double theta_rad, cd beta, int n, int snapshots, double noise_w,
                               double spacing_ratio = 0.5);

/// Schur complement inverse J_tt - J_tb J_bb^-1 J_tb^T, inverted.
/// Throws NumericalError when the angle is not identifiable.
double crb_theta(const Fim& f);

/// Sum over targets of sqrt(CRB(theta_l)) for transmit covariance rx.
double sum_rcrb(const CMat& rx, const ChannelSet& channels, int snapshots);

/// Per-target CRB for transmit covariance rx.
std::vector<double> target_crbs(const CMat& rx, const ChannelSet& channels, int snapshots);

struct EchoSample {
    CVec received;
    CVec transmitted;
    double true_angle = 0.0;
    cd beta{0.0, 0.0};
    double noise_var = 0.0;
};

/// One matched-filter echo snapshot: beta a a^H x + CN(0, noise_var I).
EchoSample simulate_echo(const CVec& x, double theta_rad, cd beta, double noise_var,
                         std::uint64_t seed, double spacing_ratio = 0.5);

/// Concentrated maximum-likelihood angle estimate over [-pi/2, pi/2]:
/// grid search with `grid_step` followed by a golden-section refinement.
/// `x_covariance` is the sample covariance of the transmitted snapshots.
double estimate_angle_ml(std::span<const EchoSample> samples, const CMat& x_covariance,
                         double grid_step, double spacing_ratio = 0.5);

struct MseCrbRow {
    double snr_db = 0.0;
    double mse = 0.0;
    double crb = 0.0;
    int trials = 0;
};

struct MseCrbSetup {
    int n_antennas = 8;
    double spacing_ratio = 0.5;
    double theta_rad = 0.3;
    cd beta{0.1, 0.0};
    int snapshots = 64;
    double grid_step = 0.1 * kPi / 180.0;
    std::uint64_t seed = 1;
};

/// Monte Carlo MSE of estimate_angle_ml against the CRB. SNR is the echo power
/// |beta|^2 tr(Rx) over the per-element noise variance.
std::vector<MseCrbRow> mse_vs_crb(const MseCrbSetup& setup, std::span<const double> snr_db,
                                  int trials);

}  // namespace iscsc::sensing
