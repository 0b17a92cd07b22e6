#pragma once

#include <vector>

#include "sdde/dde.hpp"
#include "sdde/model.hpp"

namespace sdde {

/// Deterministic second-moment trajectories on the fundamental-matrix grid.
/// M(t) = E(x~ x~^T) with x~ = x - Ex, N_lag(t) = E(x~(t) x~(t-1)^T).
struct MomentTrajectory {
    double dt = 0.0;
    double t_max = 0.0;
    int steps_per_unit = 0;
    std::vector<Eigen::MatrixXd> M;
    std::vector<Eigen::MatrixXd> N_lag;
    std::vector<Eigen::MatrixXd> F;      ///< mean-driven forcing part of M
    std::vector<Eigen::MatrixXd> P_diag; ///< P_{lp}(s) values used at each node

    Eigen::Index size() const { return static_cast<Eigen::Index>(M.size()); }
    double time_of(Eigen::Index j) const { return static_cast<double>(j) * dt; }
};

/// Time-marching discretization of the Volterra moment equations: trapezoidal
/// convolution with the fundamental-matrix kernel, implicit endpoint resolved
/// by fixed-point iteration, M symmetrized each step.
MomentTrajectory moment_volterra(const SddeSystem& sys, const InitialFunction& phi,
                                 const FundamentalGrid& grid, double t_max);

/// Closed-form additive-noise moments: M(t) = int_0^t X(s) mu mu^T X(s)^T ds.
/// Throws unless sigma = eta = 0.
MomentTrajectory moment_additive(const SddeSystem& sys, const FundamentalGrid& grid,
                                 double t_max);

} // namespace sdde
