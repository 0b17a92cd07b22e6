#pragma once

#include <Eigen/Dense>

#include "sdde/model.hpp"

namespace sdde::testing {

inline SddeSystem make_system(int n, int k) {
    SddeSystem s;
    s.n = n;
    s.k = k;
    s.drift_A = Eigen::MatrixXd::Zero(n, n);
    s.drift_B = Eigen::MatrixXd::Zero(n, n);
    s.noise_mu = Eigen::MatrixXd::Zero(n, k);
    s.noise_sigma = Tensor3(n, k);
    s.noise_eta = Tensor3(n, k);
    return s;
}

/// 2-D embedding of the scalar equation
///   dx = (a x + b x(t-1)) dt + (sigma x + eta x(t-1) + mu) dW_1
/// with an inert second component x2' = a2 x2 and a silent second channel.
inline SddeSystem scalar_embed(double a, double b, double sigma, double eta = 0.0,
                               double mu = 0.0, double a2 = -2.0) {
    SddeSystem s = make_system(2, 2);
    s.drift_A(0, 0) = a;
    s.drift_A(1, 1) = a2;
    s.drift_B(0, 0) = b;
    s.noise_sigma(0, 0, 0) = sigma;
    s.noise_eta(0, 0, 0) = eta;
    s.noise_mu(0, 0) = mu;
    return s;
}

/// Diagonal drift, both noise channels active, channel k driving component k.
inline SddeSystem diag_decoupled(double a1, double a2, double s1, double s2, double e1 = 0.0,
                                 double e2 = 0.0, double m1 = 0.0, double m2 = 0.0) {
    SddeSystem s = make_system(2, 2);
    s.drift_A(0, 0) = a1;
    s.drift_A(1, 1) = a2;
    s.noise_sigma(0, 0, 0) = s1;
    s.noise_sigma(1, 1, 1) = s2;
    s.noise_eta(0, 0, 0) = e1;
    s.noise_eta(1, 1, 1) = e2;
    s.noise_mu(0, 0) = m1;
    s.noise_mu(1, 1) = m2;
    return s;
}

} // namespace sdde::testing
