#include "sdde/mc.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "sdde/dde.hpp"

namespace sdde {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Counter-based normal stream: draw d of a path is a pure function of
// (seed, path, d), so any execution order reproduces the same noise.
struct NoiseStream {
    std::uint64_t base;

    NoiseStream(std::uint64_t seed, std::uint64_t path)
        : base(splitmix64(seed ^ splitmix64(path + 0x632BE59BD9B4E019ull))) {}

    double uniform(std::uint64_t counter) const {
        const std::uint64_t z = splitmix64(base + counter * 0x9E3779B97F4A7C15ull);
        return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal(std::uint64_t index) const {
        const double u1 = uniform(2 * index);
        const double u2 = uniform(2 * index + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }
};

struct CheckpointPlan {
    std::vector<Eigen::Index> nodes;
    std::vector<double> times;
};

} // namespace

const char* to_string(Boundedness b) {
    switch (b) {
    case Boundedness::bounded_consistent: return "bounded-consistent";
    case Boundedness::unbounded_consistent: return "unbounded-consistent";
    default: return "ambiguous";
    }
}

EnsembleMoments simulate_ensemble(const SddeSystem& sys, const InitialFunction& phi,
                                  const EnsembleSpec& spec) {
    if (spec.paths < 100) throw std::invalid_argument("mc: need at least 100 paths");
    const double md = 1.0 / spec.dt;
    const int m = static_cast<int>(std::llround(md));
    if (m < 32 || std::abs(md - m) > 1e-9 * md)
        throw std::invalid_argument("mc: dt must be 1/m with m >= 32");
    const Eigen::Index n = sys.dim();
    const auto steps = static_cast<Eigen::Index>(std::llround(spec.t_max * m));

    CheckpointPlan plan;
    for (double t : spec.checkpoint_times) {
        auto node = static_cast<Eigen::Index>(std::llround(t * m));
        node = std::min(std::max<Eigen::Index>(node, 0), steps);
        plan.nodes.push_back(node);
        plan.times.push_back(static_cast<double>(node) * spec.dt);
    }
    if (plan.nodes.empty()) throw std::invalid_argument("mc: no checkpoints");
    const auto n_ck = static_cast<Eigen::Index>(plan.nodes.size());

    // Per-channel coefficient matrices and additive columns.
    std::vector<Eigen::MatrixXd> sig(static_cast<size_t>(sys.k)), eta(static_cast<size_t>(sys.k));
    for (int k = 0; k < sys.k; ++k) {
        sig[static_cast<size_t>(k)].resize(n, n);
        eta[static_cast<size_t>(k)].resize(n, n);
        for (int i = 0; i < sys.n; ++i)
            for (int j = 0; j < sys.n; ++j) {
                sig[static_cast<size_t>(k)](i, j) = sys.noise_sigma(i, j, k);
                eta[static_cast<size_t>(k)](i, j) = sys.noise_eta(i, j, k);
            }
    }

    // State storage: per path and checkpoint, x(t) and x(t-1).
    const size_t stride = static_cast<size_t>(n_ck) * static_cast<size_t>(2 * n);
    std::vector<double> states(static_cast<size_t>(spec.paths) * stride);

    std::vector<Eigen::VectorXd> history0(static_cast<size_t>(m) + 1);
    for (int j = 0; j <= m; ++j)
        history0[static_cast<size_t>(j)] = phi(-1.0 + static_cast<double>(j) * spec.dt);

    const double sqrt_dt = std::sqrt(spec.dt);
    auto run_path = [&](long path) {
        const NoiseStream rng(spec.seed, static_cast<std::uint64_t>(path));
        // ring buffer holding the last m+1 states, x(t - 1) is m slots back
        std::vector<Eigen::VectorXd> ring = history0;
        size_t head = static_cast<size_t>(m); // index of x(t) within ring
        Eigen::VectorXd x = ring[head];
        double* out = states.data() + static_cast<size_t>(path) * stride;
        std::uint64_t draw = 0;

        auto record = [&](Eigen::Index step) {
            for (Eigen::Index c = 0; c < n_ck; ++c) {
                if (plan.nodes[static_cast<size_t>(c)] != step) continue;
                const Eigen::VectorXd& xd = ring[(head + 1) % ring.size()];
                double* slot = out + static_cast<size_t>(c) * static_cast<size_t>(2 * n);
                for (Eigen::Index i = 0; i < n; ++i) {
                    slot[i] = x(i);
                    slot[n + i] = xd(i);
                }
            }
        };
        record(0);

        for (Eigen::Index step = 0; step < steps; ++step) {
            const Eigen::VectorXd& xd = ring[(head + 1) % ring.size()]; // x(t - 1)
            Eigen::VectorXd dx = (sys.drift_A * x + sys.drift_B * xd) * spec.dt;
            for (int k = 0; k < sys.k; ++k) {
                const double xi = rng.normal(draw++);
                dx += (sys.noise_mu.col(k) + sig[static_cast<size_t>(k)] * x +
                       eta[static_cast<size_t>(k)] * xd) *
                      (sqrt_dt * xi);
            }
            x += dx;
            head = (head + 1) % ring.size();
            ring[head] = x;
            record(step + 1);
        }
    };

    // Paths are independent; threads claim them via an atomic counter and
    // write to disjoint slots, so the result is identical for any thread count.
    const int threads = std::max(1, spec.threads);
    if (threads == 1) {
        for (long p = 0; p < spec.paths; ++p) run_path(p);
    } else {
        std::atomic<long> cursor{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(threads));
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const long p = cursor.fetch_add(1);
                    if (p >= spec.paths) return;
                    run_path(p);
                }
            });
        for (auto& th : pool) th.join();
    }

    // Deterministic reduction in path order.
    EnsembleMoments out;
    out.paths = spec.paths;
    out.checkpoints = plan.times;
    const auto np = static_cast<double>(spec.paths);
    for (Eigen::Index c = 0; c < n_ck; ++c) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(n), mean_d = Eigen::VectorXd::Zero(n);
        for (long p = 0; p < spec.paths; ++p) {
            const double* slot = states.data() + static_cast<size_t>(p) * stride +
                                 static_cast<size_t>(c) * static_cast<size_t>(2 * n);
            for (Eigen::Index i = 0; i < n; ++i) {
                mean(i) += slot[i];
                mean_d(i) += slot[n + i];
            }
        }
        mean /= np;
        mean_d /= np;

        Eigen::MatrixXd m_hat = Eigen::MatrixXd::Zero(n, n), n_hat = m_hat;
        Eigen::MatrixXd prod_sq = m_hat;
        Eigen::VectorXd var = Eigen::VectorXd::Zero(n);
        for (long p = 0; p < spec.paths; ++p) {
            const double* slot = states.data() + static_cast<size_t>(p) * stride +
                                 static_cast<size_t>(c) * static_cast<size_t>(2 * n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double xi = slot[i] - mean(i);
                var(i) += xi * xi;
                for (Eigen::Index j = 0; j < n; ++j) {
                    const double pr = xi * (slot[j] - mean(j));
                    m_hat(i, j) += pr;
                    prod_sq(i, j) += pr * pr;
                    n_hat(i, j) += xi * (slot[n + j] - mean_d(j));
                }
            }
        }
        const double div = np - 1.0;
        out.mean.push_back(mean);
        out.M_hat.push_back(m_hat / div);
        out.N_hat.push_back(n_hat / div);
        Eigen::MatrixXd se(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const double mu_pr = m_hat(i, j) / np;
                const double v = std::max(0.0, prod_sq(i, j) / np - mu_pr * mu_pr);
                se(i, j) = std::sqrt(v / np);
            }
        out.M_stderr.push_back(se);
        out.mean_stderr.push_back((var / div / np).cwiseSqrt());
    }
    return out;
}

Boundedness empirical_boundedness(const EnsembleMoments& moments) {
    const auto n_ck = static_cast<Eigen::Index>(moments.checkpoints.size());
    if (n_ck < 5 || moments.checkpoints.back() - moments.checkpoints.front() < 20.0 - 1e-9)
        throw std::invalid_argument("mc: need >= 5 checkpoints spanning >= 20 time units");

    std::vector<double> trace;
    double peak = 0.0;
    for (const auto& m : moments.M_hat) {
        trace.push_back(m.trace());
        peak = std::max(peak, m.trace());
    }
    if (peak <= 0.0) throw std::invalid_argument("mc: degenerate all-zero trace");
    if (peak < 1e-10) return Boundedness::bounded_consistent;

    double st = 0, sy = 0, stt = 0, sty = 0;
    long used = 0;
    for (Eigen::Index c = 0; c < n_ck; ++c) {
        if (trace[static_cast<size_t>(c)] <= 0.0) continue;
        const double t = moments.checkpoints[static_cast<size_t>(c)];
        const double y = std::log(trace[static_cast<size_t>(c)]);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        ++used;
    }
    if (used < 5) return Boundedness::ambiguous;
    const double den = static_cast<double>(used) * stt - st * st;
    const double slope = (static_cast<double>(used) * sty - st * sy) / den;
    if (slope > 0.05) return Boundedness::unbounded_consistent;
    if (slope < -0.05) return Boundedness::bounded_consistent;
    return Boundedness::ambiguous;
}

} // namespace sdde
