#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sdde {

using Complex = std::complex<double>;

/// Third-order real tensor indexed [i][j][k] (state x state x noise).
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(int n, int k) : n_(n), k_(k), data_(static_cast<size_t>(n) * n * k, 0.0) {}

    double& operator()(int i, int j, int k) { return data_[idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data_[idx(i, j, k)]; }

    int n() const { return n_; }
    int k() const { return k_; }

    bool is_zero() const {
        for (double v : data_) if (v != 0.0) return false;
        return true;
    }
    /// Sum of absolute values of all entries (the L1 tensor norm).
    double l1_norm() const {
        double s = 0.0;
        for (double v : data_) s += std::abs(v);
        return s;
    }
    const std::vector<double>& raw() const { return data_; }

private:
    size_t idx(int i, int j, int k) const {
        return (static_cast<size_t>(i) * n_ + j) * k_ + k;
    }
    int n_ = 0, k_ = 0;
    std::vector<double> data_;
};

/// Linear SDDE with one discrete delay (normalized to 1):
///   dx_i = [A x(t) + B x(t-1)]_i dt
///        + sum_k [mu_i^k + sigma_i^{jk} x_j(t) + eta_i^{jk} x_j(t-1)] dW_k.
struct SddeSystem {
    int n = 0;                ///< state dimension
    int k = 0;                ///< number of independent Wiener processes
    Eigen::MatrixXd drift_A;  ///< n x n, current-state drift
    Eigen::MatrixXd drift_B;  ///< n x n, delayed-state drift
    Eigen::MatrixXd noise_mu; ///< n x k, additive noise intensity
    Tensor3 noise_sigma;      ///< n x n x k, multiplicative on x(t)
    Tensor3 noise_eta;        ///< n x n x k, multiplicative on x(t-1)

    static constexpr double delay = 1.0;

    Eigen::Index dim() const { return n; }
    Eigen::Index noise_dim() const { return k; }

    /// Throws std::invalid_argument on dimension mismatch or non-finite entries.
    void validate() const;

    bool has_noise() const {
        return noise_mu.cwiseAbs().sum() != 0.0 || !noise_sigma.is_zero() || !noise_eta.is_zero();
    }
};

/// L1 tensor norm of a matrix: sum over |entries|.
inline double l1_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().sum(); }
inline double l1_norm(const Eigen::MatrixXcd& m) { return m.cwiseAbs().sum(); }

enum class NoiseClass { deterministic, additive, decoupled2d, general };

const char* to_string(NoiseClass c);

/// Classifies the noise structure. The four classes are mutually exclusive:
/// deterministic (mu = sigma = eta = 0), additive (sigma = eta = 0, mu != 0),
/// decoupled2d (n = k = 2 and all noise coefficients vanish off the matching
/// Wiener index), general (everything else).
NoiseClass classify_noise(const SddeSystem& sys);

/// Initial function phi on [-1, 0], one of three parametric families.
struct InitialFunction {
    enum class Kind { constant, polynomial, cosine_exponential };
    Kind kind = Kind::constant;

    /// One parameter vector per component.
    ///   constant:            {c}                 phi_i = c
    ///   polynomial:          {c0, c1, ...}       phi_i = sum_m c_m theta^m
    ///   cosine_exponential:  {amp, rate, freq, phase}
    ///                        phi_i = amp * e^{rate*theta} * cos(freq*theta + phase)
    std::vector<std::vector<double>> params;

    int dimension() const { return static_cast<int>(params.size()); }
    double component(int i, double theta) const;
    Eigen::VectorXd operator()(double theta) const;

    /// sup-norm over [-1,0] of the L1 vector norm, sampled.
    double sup_norm() const;

    static InitialFunction zero(int n);
    static InitialFunction constant(const Eigen::VectorXd& v);
};

/// Resolved analysis settings with spec defaults applied.
struct AnalysisSettings {
    double t_max = 40.0;
    double dt = 1.0 / 64.0;
    double omega_max = 200.0;  ///< cap for root-scan imaginary extent
    double quad_tol = 1e-8;
    double root_tol = 1e-9;
    std::int64_t paths = 10000;
    std::uint64_t seed = 1;
};

struct SystemConfig {
    SddeSystem system;
    InitialFunction phi;
    AnalysisSettings analysis;
};

/// Parses and validates a JSON config document. Unknown fields are rejected.
SystemConfig load_system(const std::string& json_text);

/// Serializes back to JSON. Numeric fields survive a load/serialize round
/// trip bit-exactly.
std::string serialize(const SystemConfig& cfg);

} // namespace sdde
