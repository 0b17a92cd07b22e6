#pragma once

#include <cstdint>
#include <vector>

#include "sdde/model.hpp"

namespace sdde {

struct EnsembleSpec {
    long paths = 10000;
    double dt = 1.0 / 64.0; ///< must divide the delay
    double t_max = 20.0;
    std::uint64_t seed = 1;
    std::vector<double> checkpoint_times; ///< rounded to grid nodes
    int threads = 1;
};

struct EnsembleMoments {
    std::vector<double> checkpoints;
    std::vector<Eigen::VectorXd> mean;
    std::vector<Eigen::MatrixXd> M_hat;      ///< across-path covariance, divisor paths-1
    std::vector<Eigen::MatrixXd> N_hat;      ///< lag-1 cross covariance
    std::vector<Eigen::MatrixXd> M_stderr;   ///< per-entry standard errors of M_hat
    std::vector<Eigen::VectorXd> mean_stderr;
    long paths = 0;
};

enum class Boundedness { bounded_consistent, unbounded_consistent, ambiguous };

const char* to_string(Boundedness b);

/// Euler-Maruyama ensemble with counter-based per-path noise streams: results
/// are a pure function of (system, phi, spec), bit-identical for any thread
/// count (paths are simulated independently and reduced in path order).
EnsembleMoments simulate_ensemble(const SddeSystem& sys, const InitialFunction& phi,
                                  const EnsembleSpec& spec);

/// Classifies the growth of trace(M_hat) over the checkpoints by the sign of
/// a log-linear fit with a +-0.05 dead band. Requires at least 5 checkpoints
/// spanning at least 20 time units.
Boundedness empirical_boundedness(const EnsembleMoments& moments);

} // namespace sdde
