// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "iscsc/scenario.hpp"
#include "iscsc/types.hpp"

#include <span>
#include <vector>

namespace iscsc::semantics {

/// SINR of CU k: h^H W_k h over the other users' beams, all sensing beams and noise.
double sinr_cu(int k, std::span<const CVec> cu_channels, std::span<const CMat> w_mats,
               std::span<const CMat> r_mats, double noise_w);

/// Which interference an eavesdropper sees. CrossUser counts the other users'
/// beams; SensingOnly is the form certified by the robust S-procedure
/// constraint, where only the sensing beams act as interference.
enum class EveInterference { CrossUser, SensingOnly };

/// SINR of an eavesdropper with channel h_eve (estimated, or estimated plus a
/// perturbation) intercepting the stream of CU k.
double sinr_eve(int k, const CVec& h_eve, std::span<const CMat> w_mats, std::span<const CMat> r_mats,
                double noise_w, EveInterference mode = EveInterference::CrossUser);

/// (iota / rho) log2(1 + gamma). Throws DomainError for rho outside (0, 1].
double semantic_rate(double rho, double gamma, double iota);

/// 1 / (1 - ln Q + sum_g w_g ln p_g). Throws InfeasibleError when the
/// denominator is below 1, i.e. Q exceeds the BLEU score at rho = 1.
double rho_lower_bound(double global_bound, std::span<const double> weights,
                       std::span<const double> precisions);

/// Lower bound for one CU, honoring a `rho_lower` override.
double rho_lower_bound(const BleuParams& params);

/// BLEU with brevity penalty exp(1 - 1/rho) and geometric n-gram precision.
double bleu_oracle(double rho, std::span<const double> weights, std::span<const double> precisions);

/// [S_k - max_l S_{l|k}]^+ with the eavesdroppers at their estimated channels.
double worst_case_ssr(int k, const ChannelSet& channels, std::span<const CMat> w_mats,
                      std::span<const CMat> r_mats, double rho, double iota);

/// Sum_k -F ln rho_k.
double computational_power(std::span<const double> rhos, double f_coeff);

/// Tr(sum W_k + sum R_l).
double transmit_power(std::span<const CMat> w_mats, std::span<const CMat> r_mats);

struct PowerBreakdown {
    double comp_w = 0.0;
    double cs_w = 0.0;
    double budget_w = 0.0;

    double total() const { return comp_w + cs_w; }
    bool within_budget(double tol = 1e-9) const { return total() <= budget_w + tol; }
};

}  // namespace iscsc::semantics
