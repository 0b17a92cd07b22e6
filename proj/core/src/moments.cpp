#include "sdde/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace sdde {
namespace {

// Per-channel coefficient matrices: (sig_k)_{lj} = sigma_l^{jk}.
std::vector<Eigen::MatrixXd> channel_matrices(const Tensor3& t) {
    std::vector<Eigen::MatrixXd> out(static_cast<size_t>(t.k()));
    for (int k = 0; k < t.k(); ++k) {
        Eigen::MatrixXd m(t.n(), t.n());
        for (int l = 0; l < t.n(); ++l)
            for (int j = 0; j < t.n(); ++j) m(l, j) = t(l, j, k);
        out[static_cast<size_t>(k)] = m;
    }
    return out;
}

} // namespace

MomentTrajectory moment_volterra(const SddeSystem& sys, const InitialFunction& phi,
                                 const FundamentalGrid& grid, double t_max) {
    if (t_max > grid.t_max + 1e-12)
        throw std::invalid_argument("moments: t_max exceeds the fundamental-matrix grid");
    const int m = grid.steps_per_unit;
    const double dt = grid.dt;
    const Eigen::Index n = sys.dim();
    const auto last = static_cast<Eigen::Index>(std::llround(t_max / dt));

    const Trajectory mean = solve_dde(sys, phi, dt, t_max);
    auto mean_at = [&](Eigen::Index idx) -> Eigen::VectorXd {
        if (idx >= 0) return mean.values[static_cast<size_t>(idx)];
        return phi(static_cast<double>(idx) * dt);
    };

    const auto sig = channel_matrices(sys.noise_sigma);
    const auto eta = channel_matrices(sys.noise_eta);

    MomentTrajectory traj;
    traj.dt = dt;
    traj.t_max = static_cast<double>(last) * dt;
    traj.steps_per_unit = m;
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, n);
    traj.M.assign(static_cast<size_t>(last) + 1, zero);
    traj.N_lag.assign(static_cast<size_t>(last) + 1, zero);
    traj.F.assign(static_cast<size_t>(last) + 1, zero);
    traj.P_diag.resize(static_cast<size_t>(last) + 1);

    // P_lp(s) = sum_k E(Sigma_l^k) E(Sigma_p^k), built from the deterministic
    // mean trajectory (E x equals the unperturbed solution).
    for (Eigen::Index s = 0; s <= last; ++s) {
        Eigen::MatrixXd es = sys.noise_mu; // n x k
        const Eigen::VectorXd x = mean_at(s);
        const Eigen::VectorXd xd = mean_at(s - m);
        for (int k = 0; k < sys.k; ++k)
            es.col(k) += sig[static_cast<size_t>(k)] * x + eta[static_cast<size_t>(k)] * xd;
        traj.P_diag[static_cast<size_t>(s)] = es * es.transpose();
    }

    auto eval_q = [&](const Eigen::MatrixXd& m_s, const Eigen::MatrixXd& m_lag,
                      const Eigen::MatrixXd& n_s) -> Eigen::MatrixXd {
        Eigen::MatrixXd q = zero;
        for (int k = 0; k < sys.k; ++k) {
            const Eigen::MatrixXd& sg = sig[static_cast<size_t>(k)];
            const Eigen::MatrixXd& et = eta[static_cast<size_t>(k)];
            q += sg * m_s * sg.transpose() + et * m_lag * et.transpose();
            const Eigen::MatrixXd cross = sg * n_s * et.transpose();
            q += cross + cross.transpose();
        }
        return q;
    };

    std::vector<Eigen::MatrixXd> q_hist(static_cast<size_t>(last) + 1, zero);
    q_hist[0] = eval_q(traj.M[0], zero, zero);

    auto m_at = [&](Eigen::Index idx) -> const Eigen::MatrixXd& {
        return idx >= 0 ? traj.M[static_cast<size_t>(idx)] : zero;
    };

    for (Eigen::Index tau = 1; tau <= last; ++tau) {
        // N(tau): integral over s in [0, tau - m]; zero until t > 1 because
        // the centered solution vanishes on [-1, 0].
        if (tau > m) {
            Eigen::MatrixXd acc = zero;
            for (Eigen::Index s = 0; s <= tau - m; ++s) {
                const double w = (s == 0 || s == tau - m) ? 0.5 : 1.0;
                const Eigen::MatrixXd pq =
                    traj.P_diag[static_cast<size_t>(s)] + q_hist[static_cast<size_t>(s)];
                acc += w * (grid.at_index(tau - s) * pq *
                            grid.at_index(tau - m - s).transpose());
            }
            traj.N_lag[static_cast<size_t>(tau)] = dt * acc;
        }

        // F(tau) and the known part of the Q convolution (s < tau).
        Eigen::MatrixXd f_acc = zero, q_acc = zero;
        for (Eigen::Index s = 0; s < tau; ++s) {
            const double w = (s == 0) ? 0.5 : 1.0;
            const Eigen::MatrixXd& x = grid.at_index(tau - s);
            f_acc += w * (x * traj.P_diag[static_cast<size_t>(s)] * x.transpose());
            q_acc += w * (x * q_hist[static_cast<size_t>(s)] * x.transpose());
        }
        traj.F[static_cast<size_t>(tau)] =
            dt * (f_acc + 0.5 * traj.P_diag[static_cast<size_t>(tau)]);

        // The s = tau endpoint involves Q(tau), which depends on M(tau):
        // resolve the implicit trapezoid step by fixed-point iteration (the
        // endpoint weight dt/2 makes it a strong contraction).
        Eigen::MatrixXd q_tau = q_hist[static_cast<size_t>(tau - 1)];
        Eigen::MatrixXd m_tau = zero;
        for (int it = 0; it < 8; ++it) {
            m_tau = traj.F[static_cast<size_t>(tau)] + dt * q_acc + 0.5 * dt * q_tau;
            m_tau = 0.5 * (m_tau + m_tau.transpose()).eval();
            const Eigen::MatrixXd q_new =
                eval_q(m_tau, m_at(tau - m), traj.N_lag[static_cast<size_t>(tau)]);
            const double delta = (q_new - q_tau).cwiseAbs().sum();
            q_tau = q_new;
            if (delta < 1e-14 * (1.0 + q_tau.cwiseAbs().sum())) break;
        }
        traj.M[static_cast<size_t>(tau)] = m_tau;
        q_hist[static_cast<size_t>(tau)] = q_tau;
    }
    return traj;
}

MomentTrajectory moment_additive(const SddeSystem& sys, const FundamentalGrid& grid,
                                 double t_max) {
    if (!sys.noise_sigma.is_zero() || !sys.noise_eta.is_zero())
        throw std::invalid_argument("moments: moment_additive needs sigma = eta = 0");
    if (t_max > grid.t_max + 1e-12)
        throw std::invalid_argument("moments: t_max exceeds the fundamental-matrix grid");
    const int m = grid.steps_per_unit;
    const double dt = grid.dt;
    const Eigen::Index n = sys.dim();
    const auto last = static_cast<Eigen::Index>(std::llround(t_max / dt));

    const Eigen::MatrixXd p = sys.noise_mu * sys.noise_mu.transpose();
    MomentTrajectory traj;
    traj.dt = dt;
    traj.t_max = static_cast<double>(last) * dt;
    traj.steps_per_unit = m;
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, n);
    traj.M.assign(static_cast<size_t>(last) + 1, zero);
    traj.N_lag.assign(static_cast<size_t>(last) + 1, zero);
    traj.P_diag.assign(static_cast<size_t>(last) + 1, p);

    auto kern = [&](Eigen::Index s) {
        return Eigen::MatrixXd(grid.at_index(s) * p * grid.at_index(s).transpose());
    };
    for (Eigen::Index s = 1; s <= last; ++s)
        traj.M[static_cast<size_t>(s)] =
            traj.M[static_cast<size_t>(s - 1)] + 0.5 * dt * (kern(s - 1) + kern(s));
    // N(t) = int_1^t X(u) P X(u-1)^T du after the change of variable u = t - s.
    for (Eigen::Index s = m + 1; s <= last; ++s) {
        auto lag = [&](Eigen::Index u) {
            return Eigen::MatrixXd(grid.at_index(u) * p * grid.at_index(u - m).transpose());
        };
        traj.N_lag[static_cast<size_t>(s)] =
            traj.N_lag[static_cast<size_t>(s - 1)] + 0.5 * dt * (lag(s - 1) + lag(s));
    }
    traj.F = traj.M;
    return traj;
}

} // namespace sdde
