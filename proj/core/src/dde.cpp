#include "sdde/dde.hpp"

#include <cmath>
#include <stdexcept>

namespace sdde {
namespace {

int steps_from_dt(double dt, int min_steps) {
    if (!(dt > 0.0)) throw std::invalid_argument("dde: dt must be positive");
    const double md = 1.0 / dt;
    const int m = static_cast<int>(std::llround(md));
    if (m < 1 || std::abs(md - m) > 1e-9 * md)
        throw std::invalid_argument("dde: dt must divide the delay, dt = 1/m");
    if (m < min_steps) throw std::invalid_argument("dde: dt too coarse, need 1/dt >= min_steps");
    return m;
}

// Cubic Lagrange interpolation at node offset x in [0,3] on four consecutive
// grid values. Used for the delayed term at half steps; the stencil stays
// inside one unit interval so it never straddles a derivative kink.
template <class Mat>
Mat cubic4(const Mat& v0, const Mat& v1, const Mat& v2, const Mat& v3, double x) {
    const double w0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
    const double w1 = x * (x - 2.0) * (x - 3.0) / 2.0;
    const double w2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
    const double w3 = x * (x - 1.0) * (x - 2.0) / 6.0;
    return w0 * v0 + w1 * v1 + w2 * v2 + w3 * v3;
}

// Delayed value at global position j + frac (frac in {0, 0.5}) steps into the
// source interval starting at grid index `base`, which spans m steps.
template <class Mat>
Mat delayed_value(const std::vector<Mat>& grid, Eigen::Index base, int m, int p, bool half) {
    if (!half) return grid[static_cast<size_t>(base + p)];
    int k0 = p - 1;
    if (k0 < 0) k0 = 0;
    if (k0 > m - 3) k0 = m - 3;
    const double x = (p + 0.5) - k0;
    const auto b = static_cast<size_t>(base + k0);
    return cubic4(grid[b], grid[b + 1], grid[b + 2], grid[b + 3], x);
}

// One classical RK4 step for Y' = A Y + g(t), with the forcing given at the
// step endpoints and midpoint.
template <class Mat>
Mat rk4_step(const Eigen::MatrixXd& A, const Mat& y, const Mat& g0, const Mat& gh, const Mat& g1,
             double h) {
    const Mat k1 = A * y + g0;
    const Mat k2 = A * (y + 0.5 * h * k1) + gh;
    const Mat k3 = A * (y + 0.5 * h * k2) + gh;
    const Mat k4 = A * (y + h * k3) + g1;
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Integrates the DDE over [0, t_max] by the method of steps. `history` gives
// the forcing B*x(t-1) for t in the first unit interval; later intervals read
// the computed grid. HistFn(t) must accept any t in [-1, 0].
template <class Mat, class HistFn>
std::vector<Mat> march(const SddeSystem& sys, const Mat& y0, HistFn history, int m, double t_max) {
    const double dt = 1.0 / m;
    const auto n_steps = static_cast<Eigen::Index>(std::ceil(t_max / dt - 1e-9));
    std::vector<Mat> grid;
    grid.reserve(static_cast<size_t>(n_steps) + 1);
    grid.push_back(y0);

    const Eigen::MatrixXd& A = sys.drift_A;
    const Eigen::MatrixXd& B = sys.drift_B;
    for (Eigen::Index step = 0; step < n_steps; ++step) {
        const Eigen::Index j = step / m;   // unit interval index
        const int p = static_cast<int>(step - j * m); // step within the interval
        Mat g0, gh, g1;
        if (j == 0) {
            g0 = B * history(-1.0 + p * dt);
            gh = B * history(-1.0 + (p + 0.5) * dt);
            g1 = B * history(std::min(0.0, -1.0 + (p + 1.0) * dt));
        } else {
            const Eigen::Index base = (j - 1) * m;
            g0 = B * delayed_value(grid, base, m, p, false);
            gh = B * delayed_value(grid, base, m, p, true);
            g1 = B * grid[static_cast<size_t>(base + p + 1)];
        }
        grid.push_back(rk4_step(A, grid.back(), g0, gh, g1, dt));
    }
    return grid;
}

double fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
    const auto n = static_cast<double>(t.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    const double den = n * stt - st * st;
    if (den <= 0.0) throw std::invalid_argument("dde: degenerate fit window");
    return (n * sty - st * sy) / den;
}

} // namespace

FundamentalGrid fundamental_matrix(const SddeSystem& sys, double dt, double t_max, int min_steps) {
    if (t_max < 1.0) throw std::invalid_argument("dde: t_max must be >= 1");
    const int m = steps_from_dt(dt, min_steps);
    const Eigen::Index n = sys.dim();

    FundamentalGrid grid;
    grid.dt = 1.0 / m;
    grid.steps_per_unit = m;
    // X = 0 on [-1, 0), so the first interval has no delayed forcing.
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, n);
    grid.values = march(sys, Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)),
                        [&](double) { return zero; }, m, t_max);
    grid.t_max = grid.time_of(grid.size() - 1);

    const double t1 = grid.t_max;
    const double t0 = std::max(1.0, t1 / 2.0);
    double rate = 0.0;
    try {
        rate = measured_growth_rate(grid, t0, t1);
    } catch (const std::exception&) {
        rate = -50.0; // the grid decayed to numerical zero
    }
    grid.alpha_env = rate + 0.05 * (1.0 + std::abs(rate));
    grid.k_env = fit_envelope(grid, grid.alpha_env);
    return grid;
}

Trajectory solve_dde(const SddeSystem& sys, const InitialFunction& phi, double dt, double t_max,
                     int min_steps) {
    if (t_max < 1.0) throw std::invalid_argument("dde: t_max must be >= 1");
    const int m = steps_from_dt(dt, min_steps);
    Trajectory traj;
    traj.dt = 1.0 / m;
    traj.steps_per_unit = m;
    traj.values = march(sys, Eigen::VectorXd(phi(0.0)),
                        [&](double theta) { return phi(theta); }, m, t_max);
    traj.t_max = traj.time_of(traj.size() - 1);
    return traj;
}

double representation_deviation(const FundamentalGrid& grid, const SddeSystem& sys,
                                const InitialFunction& phi, const Trajectory& direct) {
    if (grid.steps_per_unit != direct.steps_per_unit)
        throw std::invalid_argument("dde: grid and trajectory steps differ");
    const int m = grid.steps_per_unit;
    const double dt = grid.dt;
    const Eigen::Index n = sys.dim();
    const Eigen::Index last = std::min(grid.size(), direct.size()) - 1;

    std::vector<Eigen::VectorXd> bphi(static_cast<size_t>(m) + 1);
    for (int k = 0; k <= m; ++k) bphi[static_cast<size_t>(k)] = sys.drift_B * phi(-1.0 + k * dt);
    const Eigen::VectorXd phi0 = phi(0.0);

    double worst = 0.0;
    for (Eigen::Index j = 0; j <= last; ++j) {
        // At theta_k the fundamental matrix argument is (j-k)*dt, which is a
        // grid node; it vanishes for k > j, and the integrand jump at k = j
        // is handled by ending the trapezoid rule there.
        const Eigen::Index kk = std::min<Eigen::Index>(j, m);
        Eigen::VectorXd integral = Eigen::VectorXd::Zero(n);
        for (Eigen::Index k = 0; k <= kk; ++k) {
            const double w = (k == 0 || k == kk) ? 0.5 : 1.0;
            integral += w * (grid.at_index(j - k) * bphi[static_cast<size_t>(k)]);
        }
        if (kk == 0) integral.setZero();
        Eigen::VectorXd rep = grid.at_index(j) * phi0 + dt * integral;
        const double dev = (rep - direct.values[static_cast<size_t>(j)]).lpNorm<1>();
        worst = std::max(worst, dev);
    }
    return worst;
}

double fit_envelope(const FundamentalGrid& grid, double alpha) {
    const double t1 = grid.t_max;
    const double t0 = std::max(1.0, t1 / 2.0);
    double rate;
    try {
        rate = measured_growth_rate(grid, t0, t1);
    } catch (const std::exception&) {
        rate = -std::numeric_limits<double>::infinity();
    }
    if (alpha <= rate)
        throw std::invalid_argument("dde: envelope rate at or below the measured growth rate");
    double k_env = 0.0;
    for (Eigen::Index j = 0; j < grid.size(); ++j)
        k_env = std::max(k_env, l1_norm(grid.at_index(j)) * std::exp(-alpha * grid.time_of(j)));
    return k_env;
}

double measured_growth_rate(const FundamentalGrid& grid, double t0, double t1) {
    if (!(t0 >= 0.0) || !(t1 > t0) || t1 > grid.t_max + 1e-12)
        throw std::invalid_argument("dde: bad growth-rate window");
    const int m = grid.steps_per_unit;
    const auto j0 = static_cast<Eigen::Index>(std::floor(t0 / grid.dt + 1e-9));
    const auto j1 = std::min(grid.size() - 1, static_cast<Eigen::Index>(std::ceil(t1 / grid.dt - 1e-9)));

    // Window the norm over unit-length blocks before fitting so oscillatory
    // near-zeros of ||X|| do not dominate the regression.
    std::vector<double> tc, lv;
    for (Eigen::Index b = j0; b + m <= j1; b += m) {
        double mx = 0.0;
        for (Eigen::Index j = b; j <= b + m; ++j) mx = std::max(mx, l1_norm(grid.at_index(j)));
        if (mx <= 0.0 || !std::isfinite(std::log(mx)))
            throw std::invalid_argument("dde: norm vanished in growth-rate window");
        tc.push_back(grid.time_of(b) + 0.5);
        lv.push_back(std::log(mx));
    }
    if (tc.size() < 2) throw std::invalid_argument("dde: growth-rate window too short");
    return fit_slope(tc, lv);
}

double growth_exponent(const std::vector<double>& values, double dt, Eigen::Index j0,
                       Eigen::Index j1) {
    if (j0 < 0 || j1 >= static_cast<Eigen::Index>(values.size()) || j1 - j0 < 1)
        throw std::invalid_argument("dde: bad exponent window");
    std::vector<double> t, y;
    for (Eigen::Index j = j0; j <= j1; ++j) {
        const double v = values[static_cast<size_t>(j)];
        if (!(v > 0.0)) throw std::invalid_argument("dde: nonpositive value in exponent window");
        t.push_back(static_cast<double>(j) * dt);
        y.push_back(std::log(v));
    }
    return fit_slope(t, y);
}

} // namespace sdde
