// SPDX-License-Identifier: Apache-2.0
#include "iscsc/semantics.hpp"

#include <algorithm>
#include <cmath>

namespace iscsc::semantics {

namespace {

double quad(const CVec& h, const CMat& m) { return (h.adjoint() * m * h)(0).real(); }

void check_all_hermitian(std::span<const CMat> mats, const char* what) {
    for (const auto& m : mats) require_hermitian(m, what);
}

double sensing_interference(const CVec& h, std::span<const CMat> r_mats) {
    double s = 0.0;
    for (const auto& r : r_mats) s += quad(h, r);
    return s;
}

void check_rho(double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("extraction ratio must lie in (0, 1]");
}

}  // namespace

double sinr_cu(int k, std::span<const CVec> cu_channels, std::span<const CMat> w_mats,
               std::span<const CMat> r_mats, double noise_w) {
    check_all_hermitian(w_mats, "W_k");
    check_all_hermitian(r_mats, "R_l");
    const CVec& h = cu_channels[k];
    double interference = sensing_interference(h, r_mats);
    for (std::size_t j = 0; j < w_mats.size(); ++j)
        if (static_cast<int>(j) != k) interference += quad(h, w_mats[j]);
    return std::max(0.0, quad(h, w_mats[k])) / (interference + noise_w);
}

double sinr_eve(int k, const CVec& h_eve, std::span<const CMat> w_mats, std::span<const CMat> r_mats,
                double noise_w, EveInterference mode) {
    check_all_hermitian(w_mats, "W_k");
    check_all_hermitian(r_mats, "R_l");
    double interference = sensing_interference(h_eve, r_mats);
    if (mode == EveInterference::CrossUser)
        for (std::size_t j = 0; j < w_mats.size(); ++j)
            if (static_cast<int>(j) != k) interference += quad(h_eve, w_mats[j]);
    return std::max(0.0, quad(h_eve, w_mats[k])) / (interference + noise_w);
}

double semantic_rate(double rho, double gamma, double iota) {
    check_rho(rho);
    if (gamma < 0.0) throw DomainError("SINR must be non-negative");
    return iota / rho * std::log2(1.0 + gamma);
}

double rho_lower_bound(double global_bound, std::span<const double> weights,
                       std::span<const double> precisions) {
    if (!(global_bound > 0.0 && global_bound <= 1.0)) throw DomainError("Q must lie in (0, 1]");
    if (weights.size() != precisions.size() || weights.empty())
        throw DomainError("weights and precisions must have equal, non-zero length");
    double den = 1.0 - std::log(global_bound);
    for (std::size_t g = 0; g < weights.size(); ++g) {
        if (!(precisions[g] > 0.0 && precisions[g] <= 1.0))
            throw DomainError("n-gram precisions must lie in (0, 1]");
        den += weights[g] * std::log(precisions[g]);
    }
    if (den < 1.0 - 1e-12)
        throw InfeasibleError("BLEU target exceeds the score reachable without compression");
    return std::min(1.0, 1.0 / den);
}

double rho_lower_bound(const BleuParams& params) {
    if (params.rho_lower) return *params.rho_lower;
    return rho_lower_bound(params.global_bound, params.weights, params.precisions);
}

double bleu_oracle(double rho, std::span<const double> weights, std::span<const double> precisions) {
    check_rho(rho);
    double log_precision = 0.0;
    for (std::size_t g = 0; g < weights.size(); ++g) log_precision += weights[g] * std::log(precisions[g]);
    return std::exp(1.0 - 1.0 / rho) * std::exp(log_precision);
}

double worst_case_ssr(int k, const ChannelSet& channels, std::span<const CMat> w_mats,
                      std::span<const CMat> r_mats, double rho, double iota) {
    const double s_k = semantic_rate(
        rho, sinr_cu(k, channels.cu_channels, w_mats, r_mats, channels.noise_comm_w), iota);
    double worst_eve = 0.0;
    for (const auto& h : channels.target_channels_est)
        worst_eve = std::max(worst_eve,
                             semantic_rate(rho, sinr_eve(k, h, w_mats, r_mats, channels.noise_sense_w), iota));
    return std::max(0.0, s_k - worst_eve);
}

double computational_power(std::span<const double> rhos, double f_coeff) {
    double p = 0.0;
    for (double r : rhos) {
        check_rho(r);
        p -= f_coeff * std::log(r);
    }
    return p;
}

double transmit_power(std::span<const CMat> w_mats, std::span<const CMat> r_mats) {
    double p = 0.0;
    for (const auto& m : w_mats) p += m.trace().real();
    for (const auto& m : r_mats) p += m.trace().real();
    return p;
}

}  // namespace iscsc::semantics
