#include "sdde/laplace.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>

#include "sdde/spectral.hpp"

namespace sdde {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Gauss-Kronrod 7-15 on [-1, 1], positive abscissae half.
constexpr double kx[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kw[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double gw[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

Eigen::MatrixXcd delta_of(const SddeSystem& sys, Complex lambda) {
    const Eigen::Index n = sys.dim();
    Eigen::MatrixXcd delta = lambda * Eigen::MatrixXcd::Identity(n, n);
    delta -= sys.drift_A.cast<Complex>();
    delta -= std::exp(-lambda) * sys.drift_B.cast<Complex>();
    return delta;
}

// Second-order rational model of the transfer matrix,
//   U(z) = I/(z-ah) + (A + B e^{-z})/(z-ah)^2,
// which matches Delta^{-1} through O(1/z^2); subtracting the product of two
// such models leaves an O(1/w^4) integrand.
Eigen::MatrixXcd model_transfer(const SddeSystem& sys, Complex z, double ah) {
    const Eigen::Index n = sys.dim();
    const Complex g = 1.0 / (z - ah);
    Eigen::MatrixXcd u = g * Eigen::MatrixXcd::Identity(n, n);
    u += (g * g) * (sys.drift_A.cast<Complex>() + std::exp(-z) * sys.drift_B.cast<Complex>());
    return u;
}

// int_m^inf t^k e^{-s t} dt for Re s > 0.
Complex lap_poly(Complex s, int k, double m) {
    Complex sum = 0.0;
    double mj = 1.0;      // m^j / j!
    double fact_k = 1.0;  // k!
    for (int j = 2; j <= k; ++j) fact_k *= j;
    Complex spow = std::pow(s, static_cast<double>(k + 1)); // s^{k+1-j} at j=0
    double jfact = 1.0;
    for (int j = 0; j <= k; ++j) {
        if (j > 0) {
            mj *= m;
            jfact *= j;
            spow /= s;
        }
        sum += (mj / jfact) * fact_k / spow;
    }
    return std::exp(-s * m) * sum;
}

// Closed-form L(u_a u_b)(lambda) where u_{rc}(t) = d_{rc} e^{ah t}
// + A_{rc} t e^{ah t} + B_{rc} (t-1) e^{ah(t-1)} H(t-1); the shifted kind
// delays the (j, p) factor by one.
Complex model_value(const SddeSystem& sys, const ProductIndex& ix, Complex lambda, double ah) {
    struct Term {
        double coef;
        double shift;
        int degree;
    };
    auto terms_of = [&](int r, int c) {
        return std::array<Term, 3>{Term{r == c ? 1.0 : 0.0, 0.0, 0},
                                   Term{sys.drift_A(r, c), 0.0, 1},
                                   Term{sys.drift_B(r, c), 1.0, 1}};
    };
    const auto ta = terms_of(ix.i, ix.h);
    const auto tb = terms_of(ix.j, ix.p);
    const double extra = ix.kind == ProductKind::shifted ? 1.0 : 0.0;

    const Complex s = lambda - 2.0 * ah;
    Complex total = 0.0;
    for (const Term& a : ta) {
        if (a.coef == 0.0) continue;
        for (const Term& b : tb) {
            if (b.coef == 0.0) continue;
            const double sa = a.shift;
            const double sb = b.shift + extra;
            const double m = std::max(sa, sb);
            const Complex pref = a.coef * b.coef * std::exp(-ah * (sa + sb));
            // expand (t-sa)^da (t-sb)^db, degrees at most 1
            Complex val = 0.0;
            for (int q1 = 0; q1 <= a.degree; ++q1)
                for (int q2 = 0; q2 <= b.degree; ++q2) {
                    double coef = 1.0;
                    if (a.degree == 1 && q1 == 0) coef *= -sa;
                    if (b.degree == 1 && q2 == 0) coef *= -sb;
                    val += coef * lap_poly(s, q1 + q2, m);
                }
            total += pref * val;
        }
    }
    return total;
}

struct Integrand {
    const SddeSystem& sys;
    Complex lambda;
    double ah;
    Eigen::Index n;

    // Returns the stacked [plain; shifted] corrected integrand matrices.
    void eval(double w, Eigen::MatrixXcd& plain, Eigen::MatrixXcd& shifted) const {
        const Complex iw(0.0, w);
        const Eigen::MatrixXcd t1 = delta_of(sys, iw).inverse();
        const Eigen::MatrixXcd t2 = delta_of(sys, lambda - iw).inverse();
        const Eigen::MatrixXcd u1 = model_transfer(sys, iw, ah);
        const Eigen::MatrixXcd u2 = model_transfer(sys, lambda - iw, ah);
        const Complex ew = std::exp(-iw);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                for (Eigen::Index h = 0; h < n; ++h)
                    for (Eigen::Index p = 0; p < n; ++p) {
                        const Eigen::Index row = i * n + j;
                        const Eigen::Index col = h * n + p;
                        plain(row, col) = t1(i, h) * t2(j, p) - u1(i, h) * u2(j, p);
                        // delayed factor at iw with the e^{-iw} weight
                        shifted(row, col) =
                            ew * (t1(j, p) * t2(i, h) - u1(j, p) * u2(i, h));
                    }
    }
};

struct Panel {
    double a, b;
    Eigen::MatrixXcd plain, shifted;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15_panel(const Integrand& f, double a, double b) {
    const Eigen::Index q = f.n * f.n;
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    Eigen::MatrixXcd pl(q, q), sh(q, q);
    Eigen::MatrixXcd kron_p = Eigen::MatrixXcd::Zero(q, q), kron_s = kron_p;
    Eigen::MatrixXcd gauss_p = kron_p, gauss_s = kron_p;

    f.eval(c, pl, sh);
    kron_p += kw[7] * pl;
    kron_s += kw[7] * sh;
    gauss_p += gw[3] * pl;
    gauss_s += gw[3] * sh;
    for (int i = 0; i < 7; ++i) {
        for (double sgn : {-1.0, 1.0}) {
            f.eval(c + sgn * h * kx[i], pl, sh);
            kron_p += kw[i] * pl;
            kron_s += kw[i] * sh;
            if (i % 2 == 1) {
                gauss_p += gw[i / 2] * pl;
                gauss_s += gw[i / 2] * sh;
            }
        }
    }
    Panel panel;
    panel.a = a;
    panel.b = b;
    panel.plain = h * kron_p;
    panel.shifted = h * kron_s;
    const double diff = h * ((kron_p - gauss_p).cwiseAbs().sum() +
                             (kron_s - gauss_s).cwiseAbs().sum());
    panel.error = std::min(std::pow(200.0 * diff, 1.5), 200.0 * diff);
    if (!std::isfinite(panel.error)) panel.error = 200.0 * diff;
    return panel;
}

} // namespace

TransferMatrix transfer(const SddeSystem& sys, Complex lambda) {
    TransferMatrix tm;
    tm.lambda = lambda;
    const Eigen::MatrixXcd delta = delta_of(sys, lambda);
    const Complex det = delta.determinant();
    const double scale = std::pow(1.0 + std::abs(lambda) + l1_norm(sys.drift_A) +
                                      l1_norm(sys.drift_B) * std::exp(-lambda.real()),
                                  static_cast<double>(sys.dim()));
    if (std::abs(det) < 1e-12 * scale)
        throw std::invalid_argument("laplace: lambda is within tolerance of a characteristic root");
    tm.entries = delta.inverse();
    tm.residual = l1_norm(Eigen::MatrixXcd(delta * tm.entries -
                                           Eigen::MatrixXcd::Identity(sys.dim(), sys.dim())));
    return tm;
}

ProductTables product_tables_freq(const SddeSystem& sys, Complex lambda,
                                  const LaplaceOptions& opts) {
    if (!(opts.alpha0 < 0.0))
        throw std::invalid_argument("laplace: frequency-domain formulas require alpha0 < 0");
    if (!(lambda.real() > 2.0 * opts.alpha0 + 1e-6))
        throw std::invalid_argument("laplace: Re lambda must exceed 2*alpha0");
    const double ah = opts.alpha0 - 0.5;
    const Eigen::Index n = sys.dim();
    const Eigen::Index q = n * n;
    Integrand f{sys, lambda, ah, n};

    // Truncation frequency: the corrected integrand decays like C/w^4, so the
    // two-sided tail beyond W is about |f(W)| * 2W/3; grow W until it passes.
    double omega = std::max(50.0, 4.0 * std::abs(lambda));
    double tail = 0.0;
    Eigen::MatrixXcd pl(q, q), sh(q, q);
    for (;; omega *= 2.0) {
        f.eval(omega, pl, sh);
        const double hi = l1_norm(pl) + l1_norm(sh);
        f.eval(-omega, pl, sh);
        tail = (hi + l1_norm(pl) + l1_norm(sh)) * omega / 3.0;
        if (tail < 0.5 * opts.quad_tol * 2.0 * kPi) break;
        if (omega * 2.0 > opts.omega_max)
            throw std::runtime_error("laplace: tail bound exceeds quad_tol at maximum omega");
    }

    // Adaptive GK15 over [-omega, omega], seeded with unit-frequency panels so
    // the oscillation of e^{-iw} is resolved from the start.
    std::priority_queue<Panel> heap;
    Eigen::MatrixXcd total_p = Eigen::MatrixXcd::Zero(q, q), total_s = total_p;
    double err = 0.0;
    const int seed_panels = std::max(8, static_cast<int>(omega / 8.0));
    for (int s = 0; s < seed_panels; ++s) {
        const double a = -omega + 2.0 * omega * s / seed_panels;
        const double b = -omega + 2.0 * omega * (s + 1) / seed_panels;
        Panel panel = gk15_panel(f, a, b);
        total_p += panel.plain;
        total_s += panel.shifted;
        err += panel.error;
        heap.push(std::move(panel));
    }
    const double target = 0.5 * opts.quad_tol * 2.0 * kPi;
    for (int iter = 0; iter < 4000 && err > target; ++iter) {
        Panel worst = heap.top();
        heap.pop();
        total_p -= worst.plain;
        total_s -= worst.shifted;
        err -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            heap.push(worst);
            break;
        }
        for (Panel child : {gk15_panel(f, worst.a, mid), gk15_panel(f, mid, worst.b)}) {
            total_p += child.plain;
            total_s += child.shifted;
            err += child.error;
            heap.push(std::move(child));
        }
    }

    ProductTables tables;
    tables.lambda = lambda;
    tables.quad_error = (err + tail) / (2.0 * kPi);
    tables.plain = total_p / (2.0 * kPi);
    tables.shifted = total_s / (2.0 * kPi);
    for (int i = 0; i < sys.n; ++i)
        for (int j = 0; j < sys.n; ++j)
            for (int h = 0; h < sys.n; ++h)
                for (int p = 0; p < sys.n; ++p) {
                    const Eigen::Index row = static_cast<Eigen::Index>(i) * n + j;
                    const Eigen::Index col = static_cast<Eigen::Index>(h) * n + p;
                    tables.plain(row, col) +=
                        model_value(sys, {ProductKind::plain, i, h, j, p}, lambda, ah);
                    tables.shifted(row, col) +=
                        model_value(sys, {ProductKind::shifted, i, h, j, p}, lambda, ah);
                }
    return tables;
}

ProductTransform product_transform_freq(const SddeSystem& sys, const ProductIndex& ix,
                                        Complex lambda, const LaplaceOptions& opts) {
    const ProductTables tables = product_tables_freq(sys, lambda, opts);
    ProductTransform pt;
    pt.lambda = lambda;
    pt.index = ix;
    pt.value = tables.get(ix, sys.n);
    pt.quad_error = tables.quad_error;
    return pt;
}

ProductTransform product_transform_time(const FundamentalGrid& grid, const ProductIndex& ix,
                                        Complex lambda, double quad_tol) {
    const int m = grid.steps_per_unit;
    const bool shifted = ix.kind == ProductKind::shifted;
    const Eigen::Index start = shifted ? m : 0;
    const Eigen::Index last = grid.size() - 1;
    if (last <= start) throw std::invalid_argument("laplace: grid too short");

    const double decay = lambda.real() - 2.0 * grid.alpha_env;
    if (!(decay > 0.0))
        throw std::invalid_argument("laplace: Re lambda too small for the envelope tail bound");
    const double tail =
        grid.k_env * grid.k_env * std::exp(-decay * grid.t_max) / decay;
    if (tail > quad_tol)
        throw std::runtime_error(
            "laplace: time-domain tail bound too large; need t_max >= " +
            std::to_string(grid.t_max + std::log(tail / quad_tol) / decay));

    auto sample = [&](Eigen::Index idx) -> Complex {
        const double t = grid.time_of(idx);
        const double va = grid.at_index(idx)(ix.i, ix.h);
        const double vb = grid.at_index(shifted ? idx - m : idx)(ix.j, ix.p);
        return std::exp(-lambda * t) * va * vb;
    };

    // Composite Simpson inside unit intervals (the integrand has derivative
    // kinks only at integer t, which are panel boundaries when m is even).
    Complex integral = 0.0;
    if (m % 2 == 0) {
        Eigen::Index idx = start;
        while (idx + 2 <= last) {
            integral += (grid.dt / 3.0) * (sample(idx) + 4.0 * sample(idx + 1) + sample(idx + 2));
            idx += 2;
        }
        if (idx < last) integral += 0.5 * grid.dt * (sample(idx) + sample(idx + 1));
    } else {
        for (Eigen::Index idx = start; idx < last; ++idx)
            integral += 0.5 * grid.dt * (sample(idx) + sample(idx + 1));
    }

    ProductTransform pt;
    pt.lambda = lambda;
    pt.index = ix;
    pt.value = integral;
    pt.quad_error = tail + std::pow(grid.dt, m % 2 == 0 ? 4.0 : 2.0) * grid.t_max;
    return pt;
}

LaplaceProvider::LaplaceProvider(const SddeSystem& sys, double quad_tol) : sys_(sys) {
    opts_.quad_tol = quad_tol;
    opts_.alpha0 = rightmost_root(sys).alpha0;
}

const ProductTables& LaplaceProvider::tables(Complex lambda) {
    const std::pair<double, double> key{lambda.real(), lambda.imag()};
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end())
        it = cache_.emplace(key, product_tables_freq(sys_, lambda, opts_)).first;
    return it->second;
}

Complex LaplaceProvider::value(const ProductIndex& ix, Complex lambda) {
    return tables(lambda).get(ix, sys_.n);
}

} // namespace sdde
