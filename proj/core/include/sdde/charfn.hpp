#pragma once

#include "sdde/laplace.hpp"
#include "sdde/spectral.hpp"

namespace sdde {

/// One evaluation of the second-moment characteristic objects at lambda for
/// the 2-D decoupled case: A (plain product transforms), S = A^{-1}, T, G,
/// D = A G and H = det(I - D).
struct CharFnEvaluation {
    Complex lambda;
    Eigen::Matrix2cd A_mat, S_mat, T_mat, G_mat, D_mat;
    Complex H_val;
    double cond_A = 0.0; ///< L1 condition estimate of A_mat
};

struct MomentSpectralSummary {
    double alpha0 = 0.0;     ///< rightmost root of h
    double alpha_A = 0.0;    ///< rightmost root of det A (-inf when none found)
    double alpha_bar0 = 0.0; ///< max(alpha0, alpha_A)
    double beta0 = 0.0;      ///< rightmost root of H (-inf marker when no roots)
    bool has_H_roots = false;
    std::vector<RootRecord> h_roots, detA_roots, H_roots;
    ScanRegion H_region;
    double d0_fit = 0.0; ///< fitted constant in the ||D|| <= d0/|lambda| decay bound
};

/// True when the noise structure matches the 2-D decoupled theory: n = k = 2
/// and channel k only touches equation k (sigma_i^{jk} = eta_i^{jk} = 0 for
/// i != k). Additive and deterministic 2-D systems qualify trivially.
bool is_decoupled_2d(const SddeSystem& sys);

/// Proposition-based evaluation (2-D decoupled case). Throws when A(lambda)
/// is numerically singular.
CharFnEvaluation eval_charfn(const SddeSystem& sys, Complex lambda, LaplaceProvider& lap);

/// Generic tensor pipeline for any n, k: inverts the n^2 x n^2 operator of
/// plain product transforms and reduces by the M_{kl} = M_{lk} symmetry to
/// n(n+1)/2 unknowns; returns det of the reduced operator.
Complex eval_charfn_genN(const SddeSystem& sys, Complex lambda, LaplaceProvider& lap);

/// Locates alpha_A, alpha_bar0 and beta0. Requires alpha_bar0 < 0 for the
/// beta0 scan; throws otherwise (the boundedness theorem needs it).
MomentSpectralSummary compute_beta0(const SddeSystem& sys, LaplaceProvider& lap,
                                    double root_tol = 1e-7);

/// Stationary second moment for bounded decoupled systems: the diagonal from
/// (I - D(0))^{-1} A(0) (mu_1^2, mu_2^2)^T and the off-diagonal from the
/// lag-free cross transform at lambda = 0. Throws when H(0) is near zero.
Eigen::Matrix2d stationary_moment(const SddeSystem& sys, LaplaceProvider& lap);

} // namespace sdde
