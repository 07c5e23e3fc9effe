// SPDX-License-Identifier: Apache-2.0
#include "iscsc/sensing.hpp"

#include "iscsc/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace iscsc::sensing {

namespace {

void check_angle(double theta_rad) {
    if (!std::isfinite(theta_rad) || std::abs(theta_rad) > kPi / 2 + 1e-12)
        throw DomainError("steering angle outside [-pi/2, pi/2]");
}

CMat herm_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

double re_trace(const CMat& m, const CMat& x) {
    // Re tr(m x) without forming the product
    return (m.transpose().array() * x.array()).sum().real();
}

void require_psd(const CMat& rx) {
    require_hermitian(rx, "rx", 1e-8);
    Eigen::SelfAdjointEigenSolver<CMat> es(rx, Eigen::EigenvaluesOnly);
    const double scale = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-8 * scale)
        throw DomainError("rx is not positive semidefinite");
}

}  // namespace

CVec steering_vector(double theta_rad, int n, double spacing_ratio) {
    check_angle(theta_rad);
    CVec a(n);
    const double phase = 2.0 * kPi * spacing_ratio * std::sin(theta_rad);
    for (int i = 0; i < n; ++i) a[i] = std::polar(1.0, -phase * i);
    return a;
}

CVec steering_derivative(double theta_rad, int n, double spacing_ratio) {
    CVec a = steering_vector(theta_rad, n, spacing_ratio);
    const double dphase = 2.0 * kPi * spacing_ratio * std::cos(theta_rad);
    for (int i = 0; i < n; ++i) a[i] *= cd(0.0, -dphase * i);
    return a;
}

Eigen::Matrix3d Fim::assembled() const {
    Eigen::Matrix3d m;
    m << j_tt, j_tb[0], j_tb[1],
         j_tb[0], j_bb, 0.0,
         j_tb[1], 0.0, j_bb;
    return m;
}

Fim FimFunctionals::evaluate(const CMat& rx) const {
    Fim f;
    f.j_tt = re_trace(tt, rx);
    f.j_tb = {re_trace(tb_re, rx), re_trace(tb_im, rx)};
    f.j_bb = re_trace(bb, rx);
    return f;
}

Fim fim(double theta_rad, cd beta, const CMat& rx, int snapshots, double noise_w,
        double spacing_ratio) {
    if (!(noise_w > 0.0)) throw DomainError("sensing noise must be positive");
    if (snapshots < 1) throw DomainError("snapshot count must be positive");
    require_psd(rx);
    const int n = static_cast<int>(rx.rows());
    const CVec a = steering_vector(theta_rad, n, spacing_ratio);
    const CVec da = steering_derivative(theta_rad, n, spacing_ratio);
    const CMat b = a * a.adjoint();
    const CMat db = da * a.adjoint() + a * da.adjoint();

    const double c = 2.0 * snapshots / noise_w;
    Fim f;
    f.j_tt = c * std::norm(beta) * (db * rx * db.adjoint()).trace().real();
    const cd z = std::conj(beta) * (b * rx * db.adjoint()).trace();
    // d mu / d Re(beta) = B x, d mu / d Im(beta) = j B x
    f.j_tb = {c * z.real(), c * (cd(0.0, 1.0) * z).real()};
    f.j_bb = c * (b * rx * b.adjoint()).trace().real();
    return f;
}

FimFunctionals fim_functionals(double theta_rad, cd beta, int n, int snapshots, double noise_w,
                               double spacing_ratio) {
    if (!(noise_w > 0.0)) throw DomainError("sensing noise must be positive");
    const CVec a = steering_vector(theta_rad, n, spacing_ratio);
    const CVec da = steering_derivative(theta_rad, n, spacing_ratio);
    const CMat b = a * a.adjoint();
    const CMat db = da * a.adjoint() + a * da.adjoint();
    const double c = 2.0 * snapshots / noise_w;

    FimFunctionals m;
    m.tt = herm_part(c * std::norm(beta) * db.adjoint() * db);
    const CMat cross = db.adjoint() * b;
    m.tb_re = herm_part(c * std::conj(beta) * cross);
    m.tb_im = herm_part(c * cd(0.0, 1.0) * std::conj(beta) * cross);
    m.bb = herm_part(c * b.adjoint() * b);
    return m;
}

double crb_theta(const Fim& f) {
    if (!(f.j_bb > 0.0)) throw NumericalError("unidentifiable angle: J_beta,beta is singular");
    const double schur = f.j_tt - f.j_tb.squaredNorm() / f.j_bb;
    if (!(schur > 1e-14 * std::max(std::abs(f.j_tt), std::numeric_limits<double>::min())))
        throw NumericalError("unidentifiable angle: singular Schur complement");
    return 1.0 / schur;
}

std::vector<double> target_crbs(const CMat& rx, const ChannelSet& channels, int snapshots) {
    std::vector<double> out;
    out.reserve(channels.num_targets());
    for (int l = 0; l < channels.num_targets(); ++l)
        out.push_back(crb_theta(fim(channels.target_angles_rad[l], channels.beta[l], rx, snapshots,
                                    channels.noise_sense_w, channels.spacing_ratio)));
    return out;
}

double sum_rcrb(const CMat& rx, const ChannelSet& channels, int snapshots) {
    double s = 0.0;
    for (double c : target_crbs(rx, channels, snapshots)) s += std::sqrt(c);
    return s;
}

EchoSample simulate_echo(const CVec& x, double theta_rad, cd beta, double noise_var,
                         std::uint64_t seed, double spacing_ratio) {
    if (noise_var < 0.0) throw DomainError("noise variance must be non-negative");
    const int n = static_cast<int>(x.size());
    const CVec a = steering_vector(theta_rad, n, spacing_ratio);
    EchoSample s;
    s.transmitted = x;
    s.true_angle = theta_rad;
    s.beta = beta;
    s.noise_var = noise_var;
    s.received = beta * a * (a.adjoint() * x)(0);
    if (noise_var > 0.0) {
        Rng rng(seed);
        for (int i = 0; i < n; ++i) s.received[i] += rng.complex_normal(noise_var);
    }
    return s;
}

double estimate_angle_ml(std::span<const EchoSample> samples, const CMat& x_covariance,
                         double grid_step, double spacing_ratio) {
    if (samples.empty()) throw DomainError("estimate_angle_ml needs at least one sample");
    if (!(grid_step > 0.0)) throw DomainError("grid step must be positive");
    const int n = static_cast<int>(samples.front().received.size());
    CMat cross = CMat::Zero(n, n);
    for (const auto& s : samples) cross += s.received * s.transmitted.adjoint();

    auto likelihood = [&](double theta) {
        const CVec a = steering_vector(theta, n, spacing_ratio);
        const double den = (a.adjoint() * x_covariance * a)(0).real();
        if (!(den > 0.0)) return 0.0;
        return std::norm((a.adjoint() * cross * a)(0)) / den;
    };

    const double half = kPi / 2;
    const int points = static_cast<int>(std::floor(kPi / grid_step)) + 1;
    double best_theta = -half;
    double best_val = -1.0;
    for (int i = 0; i < points; ++i) {
        const double theta = std::min(-half + i * grid_step, half);
        const double v = likelihood(theta);
        if (v > best_val) {
            best_val = v;
            best_theta = theta;
        }
    }

    // golden-section refinement inside one grid cell on either side
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::max(-half, best_theta - grid_step);
    double hi = std::min(half, best_theta + grid_step);
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = likelihood(x1);
    double f2 = likelihood(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = likelihood(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = likelihood(x1);
        }
    }
    const double refined = 0.5 * (lo + hi);
    return likelihood(refined) >= best_val ? refined : best_theta;
}

std::vector<MseCrbRow> mse_vs_crb(const MseCrbSetup& setup, std::span<const double> snr_db,
                                  int trials) {
    if (trials < 1) throw DomainError("trial count must be positive");
    const int n = setup.n_antennas;
    const int t_count = setup.snapshots;

    Rng wave_rng(setup.seed);
    std::vector<CVec> waveform(t_count, CVec(n));
    for (auto& x : waveform)
        for (int i = 0; i < n; ++i) x[i] = wave_rng.complex_normal(1.0);
    CMat rx = CMat::Zero(n, n);
    for (const auto& x : waveform) rx += x * x.adjoint();
    rx /= static_cast<double>(t_count);

    const double echo_power = std::norm(setup.beta) * rx.trace().real();
    std::vector<MseCrbRow> rows;
    for (std::size_t si = 0; si < snr_db.size(); ++si) {
        const double noise = echo_power / std::pow(10.0, snr_db[si] / 10.0);
        const double crb =
            crb_theta(fim(setup.theta_rad, setup.beta, rx, t_count, noise, setup.spacing_ratio));
        double sq = 0.0;
        std::vector<EchoSample> samples(t_count);
        for (int trial = 0; trial < trials; ++trial) {
            for (int t = 0; t < t_count; ++t) {
                const std::uint64_t s = mix_seed(setup.seed, si, static_cast<std::uint64_t>(trial),
                                                 static_cast<std::uint64_t>(t));
                samples[t] = simulate_echo(waveform[t], setup.theta_rad, setup.beta, noise, s,
                                           setup.spacing_ratio);
            }
            const double est = estimate_angle_ml(samples, rx, setup.grid_step, setup.spacing_ratio);
            sq += (est - setup.theta_rad) * (est - setup.theta_rad);
        }
        rows.push_back({snr_db[si], sq / trials, crb, trials});
    }
    return rows;
}

}  // namespace iscsc::sensing
