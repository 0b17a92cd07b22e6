#pragma once

#include <vector>

#include "sdde/model.hpp"

namespace sdde {

/// Fundamental matrix X(t) of the unperturbed DDE sampled on a uniform grid.
/// X(0) = I and X(t) = 0 on [-1, 0); the step divides the delay exactly so
/// delayed reads are grid lookups.
struct FundamentalGrid {
    double dt = 0.0;
    double t_max = 0.0;
    int steps_per_unit = 0;              ///< m with dt = 1/m
    std::vector<Eigen::MatrixXd> values; ///< X(t_j), t_j = j*dt, j = 0..t_max/dt

    double k_env = 1.0;     ///< envelope constant, ||X(t)|| <= k_env * e^{alpha_env t}
    double alpha_env = 0.0; ///< fitted envelope rate (upper estimate of the decay rate)

    const Eigen::MatrixXd& at_index(Eigen::Index j) const { return values[static_cast<size_t>(j)]; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(values.size()); }
    double time_of(Eigen::Index j) const { return static_cast<double>(j) * dt; }
};

struct Trajectory {
    double dt = 0.0;
    double t_max = 0.0;
    int steps_per_unit = 0;
    std::vector<Eigen::VectorXd> values;

    Eigen::Index size() const { return static_cast<Eigen::Index>(values.size()); }
    double time_of(Eigen::Index j) const { return static_cast<double>(j) * dt; }
};

/// Integrates X' = A X(t) + B X(t-1) by the method of steps with a classical
/// 4th-order scheme restarted at each integer time (X is only C0 there).
/// Requires dt = 1/m with m >= min_steps and t_max >= 1.
FundamentalGrid fundamental_matrix(const SddeSystem& sys, double dt, double t_max,
                                   int min_steps = 32);

/// Solves the unperturbed DDE with history phi. The result is also the first
/// moment E x(t; phi) of the stochastic equation.
Trajectory solve_dde(const SddeSystem& sys, const InitialFunction& phi, double dt, double t_max,
                     int min_steps = 32);

/// Evaluates the fundamental-matrix representation of the solution,
///   x(t) = X(t) phi(0) + int_{-1}^{0} X(t-1-theta) B phi(theta) dtheta,
/// at every grid node, by composite quadrature on the grid. Returns the
/// maximum L1 deviation from `direct` (used as a cross-check of the solver).
double representation_deviation(const FundamentalGrid& grid, const SddeSystem& sys,
                                const InitialFunction& phi, const Trajectory& direct);

/// K_env = max over the grid of ||X(t)|| e^{-alpha t} (L1 tensor norm), the
/// smallest grid-valid constant with ||X(t)|| <= K_env e^{alpha t}.
/// Throws if alpha is at or below the measured growth rate of the grid.
double fit_envelope(const FundamentalGrid& grid, double alpha);

/// Least-squares slope of log(max-over-window ||X||) versus t on [t0, t1];
/// an empirical estimate of the Lyapunov exponent.
double measured_growth_rate(const FundamentalGrid& grid, double t0, double t1);

/// Least-squares slope of log(values) vs t over the node range [j0, j1].
/// Throws if any value in the window is not strictly positive.
double growth_exponent(const std::vector<double>& values, double dt, Eigen::Index j0,
                       Eigen::Index j1);

} // namespace sdde
