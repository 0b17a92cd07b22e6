#include "sdde/charfn.hpp"

#include <cmath>
#include <stdexcept>

namespace sdde {
namespace {

// sigma_k^m and eta_k^m of the decoupled theory (channel k drives row k).
double sig2(const SddeSystem& sys, int k, int m) { return sys.noise_sigma(k, m, k); }
double eta2(const SddeSystem& sys, int k, int m) { return sys.noise_eta(k, m, k); }

Complex plain_at(const ProductTables& t, int n, int i, int h, int j, int p) {
    return t.plain(static_cast<Eigen::Index>(i) * n + j, static_cast<Eigen::Index>(h) * n + p);
}

Complex shifted_at(const ProductTables& t, int n, int i, int h, int j, int p) {
    return t.shifted(static_cast<Eigen::Index>(i) * n + j, static_cast<Eigen::Index>(h) * n + p);
}

} // namespace

bool is_decoupled_2d(const SddeSystem& sys) {
    if (sys.n != 2 || sys.k != 2) return false;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                if (i != k && (sys.noise_sigma(i, j, k) != 0.0 || sys.noise_eta(i, j, k) != 0.0))
                    return false;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            if (i != k && sys.noise_mu(i, k) != 0.0) return false;
    return true;
}

CharFnEvaluation eval_charfn(const SddeSystem& sys, Complex lambda, LaplaceProvider& lap) {
    if (!is_decoupled_2d(sys))
        throw std::invalid_argument("charfn: eval_charfn needs a 2-D decoupled system");
    const ProductTables& tab = lap.tables(lambda);
    const Complex el = std::exp(-lambda);

    CharFnEvaluation ev;
    ev.lambda = lambda;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) ev.A_mat(i, k) = plain_at(tab, 2, i, k, i, k);

    const Complex detA = ev.A_mat.determinant();
    const double norm_a = l1_norm(Eigen::MatrixXcd(ev.A_mat));
    if (std::abs(detA) < 1e-10 * norm_a)
        throw std::runtime_error("charfn: A(lambda) numerically singular");
    ev.S_mat = ev.A_mat.inverse();
    ev.cond_A = norm_a * l1_norm(Eigen::MatrixXcd(ev.S_mat));

    for (int k = 0; k < 2; ++k)
        for (int p = 0; p < 2; ++p) {
            Complex t = 2.0 * (sig2(sys, k, 0) * sig2(sys, k, 1) +
                               eta2(sys, k, 0) * eta2(sys, k, 1) * el) *
                        plain_at(tab, 2, 0, p, 1, p);
            for (int m = 0; m < 2; ++m)
                for (int l = 0; l < 2; ++l)
                    t += 2.0 * sig2(sys, k, m) * eta2(sys, k, l) * shifted_at(tab, 2, m, p, l, p);
            ev.T_mat(k, p) = t;
        }

    for (int k = 0; k < 2; ++k)
        for (int q = 0; q < 2; ++q) {
            Complex g = sig2(sys, k, q) * sig2(sys, k, q) + eta2(sys, k, q) * eta2(sys, k, q) * el;
            for (int p = 0; p < 2; ++p) g += ev.T_mat(k, p) * ev.S_mat(p, q);
            ev.G_mat(k, q) = g;
        }

    ev.D_mat = ev.A_mat * ev.G_mat;
    ev.H_val = (Eigen::Matrix2cd::Identity() - ev.D_mat).determinant();
    return ev;
}

Complex eval_charfn_genN(const SddeSystem& sys, Complex lambda, LaplaceProvider& lap) {
    const int n = sys.n;
    const Eigen::Index q = static_cast<Eigen::Index>(n) * n;
    const ProductTables& tab = lap.tables(lambda);
    const Complex el = std::exp(-lambda);

    // C1/C2 couple L(Q_hp) to L(M_jq) and L(N_jq); rows (h,p), columns (j,q).
    Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(q, q), c2 = c1;
    for (int h = 0; h < n; ++h)
        for (int p = 0; p < n; ++p)
            for (int j = 0; j < n; ++j)
                for (int qq = 0; qq < n; ++qq) {
                    Complex v1 = 0.0, v2 = 0.0;
                    for (int m = 0; m < sys.k; ++m) {
                        v1 += sys.noise_sigma(h, j, m) * sys.noise_sigma(p, qq, m) +
                              el * sys.noise_eta(h, j, m) * sys.noise_eta(p, qq, m);
                        v2 += sys.noise_sigma(h, j, m) * sys.noise_eta(p, qq, m) +
                              sys.noise_eta(h, qq, m) * sys.noise_sigma(p, j, m);
                    }
                    const Eigen::Index row = static_cast<Eigen::Index>(h) * n + p;
                    const Eigen::Index col = static_cast<Eigen::Index>(j) * n + qq;
                    c1(row, col) = v1;
                    c2(row, col) = v2;
                }

    const Eigen::MatrixXcd s_full = tab.plain.inverse();
    const Eigen::MatrixXcd t_full = c1 + c2 * tab.shifted * s_full;
    const Eigen::MatrixXcd k_full = tab.plain * t_full;

    // Reduce to the n(n+1)/2 independent entries of the symmetric unknown M.
    const Eigen::Index ns = static_cast<Eigen::Index>(n) * (n + 1) / 2;
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<size_t>(ns));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) pairs.emplace_back(i, j);
    Eigen::MatrixXcd k_sym(ns, ns);
    for (Eigen::Index a = 0; a < ns; ++a) {
        const auto [i, j] = pairs[static_cast<size_t>(a)];
        const Eigen::Index row = static_cast<Eigen::Index>(i) * n + j;
        for (Eigen::Index b = 0; b < ns; ++b) {
            const auto [k, l] = pairs[static_cast<size_t>(b)];
            Complex v = k_full(row, static_cast<Eigen::Index>(k) * n + l);
            if (k != l) v += k_full(row, static_cast<Eigen::Index>(l) * n + k);
            k_sym(a, b) = v;
        }
    }
    return (Eigen::MatrixXcd::Identity(ns, ns) - k_sym).determinant();
}

MomentSpectralSummary compute_beta0(const SddeSystem& sys, LaplaceProvider& lap,
                                    double root_tol) {
    MomentSpectralSummary sum;
    const SpectralSummary hs = rightmost_root(sys);
    sum.alpha0 = hs.alpha0;
    sum.h_roots = hs.roots;
    if (!(sum.alpha0 < 0.0))
        throw std::invalid_argument("charfn: compute_beta0 requires alpha0 < 0");

    auto det_a = [&](Complex l) -> Complex {
        const ProductTables& tab = lap.tables(l);
        Eigen::Matrix2cd a;
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k) a(i, k) = plain_at(tab, 2, i, k, i, k);
        return a.determinant();
    };

    // det A is analytic right of 2*alpha0; its magnitude decays like 1/|l|^2,
    // so the zero-detection floor is scaled down accordingly.
    {
        ScanRegion reg;
        reg.re_min = 2.0 * sum.alpha0 + std::max(0.05, 0.05 * std::abs(sum.alpha0));
        reg.re_max = 1.0;
        reg.omega_max = 40.0;
        RootScanOptions opts;
        opts.root_tol = 1e-6;
        opts.cell_radius = 5e-3;
        opts.func_scale = 1e-3;
        sum.detA_roots = roots_in_region(det_a, reg, opts);
    }
    sum.alpha_A = -std::numeric_limits<double>::infinity();
    for (const auto& r : sum.detA_roots) sum.alpha_A = std::max(sum.alpha_A, r.lambda.real());
    sum.alpha_bar0 = std::max(sum.alpha0, sum.alpha_A);
    if (!(sum.alpha_bar0 < 0.0))
        throw std::runtime_error("charfn: alpha_bar0 >= 0, H is not analytic right of 0");

    auto h_of = [&](Complex l) -> Complex { return eval_charfn(sys, l, lap).H_val; };

    // Empirical Lem-D bound: fit d0 = max ||D|| * |l| over sample rays, then
    // ||D|| < 0.3 (hence |H - 1| < 1) outside radius d0 / 0.3.
    const double lo = sum.alpha_bar0 + std::max(1e-3, 0.01 * std::abs(sum.alpha_bar0));
    double d0 = 0.0;
    for (double w : {5.0, 10.0, 20.0, 40.0}) {
        const Complex l(lo, w);
        d0 = std::max(d0, l1_norm(Eigen::MatrixXcd(eval_charfn(sys, l, lap).D_mat)) * std::abs(l));
    }
    for (double x : {1.0, 2.0, 4.0}) {
        const Complex l(x, 0.0);
        d0 = std::max(d0, l1_norm(Eigen::MatrixXcd(eval_charfn(sys, l, lap).D_mat)) * std::abs(l));
    }
    sum.d0_fit = d0;
    double radius = std::max(4.0, d0 / 0.3);
    for (int grow = 0; grow < 4; ++grow) {
        // verify the bound actually holds on the candidate boundary
        double worst = 0.0;
        for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const Complex top(lo + f * (radius - lo), radius);
            const Complex right(radius, f * radius);
            worst = std::max(worst,
                             l1_norm(Eigen::MatrixXcd(eval_charfn(sys, top, lap).D_mat)));
            worst = std::max(worst,
                             l1_norm(Eigen::MatrixXcd(eval_charfn(sys, right, lap).D_mat)));
        }
        if (worst < 0.3) break;
        if (grow == 3)
            throw std::runtime_error("charfn: ||D|| does not decay on the scan boundary");
        radius *= 2.0;
    }

    sum.H_region.re_min = lo;
    sum.H_region.re_max = radius;
    sum.H_region.omega_max = radius;
    RootScanOptions opts;
    opts.root_tol = root_tol;
    opts.cell_radius = 2e-3;
    opts.func_scale = 1.0;
    sum.H_roots = roots_in_region(h_of, sum.H_region, opts);
    sum.has_H_roots = !sum.H_roots.empty();
    sum.beta0 = -std::numeric_limits<double>::infinity();
    for (const auto& r : sum.H_roots) sum.beta0 = std::max(sum.beta0, r.lambda.real());
    return sum;
}

Eigen::Matrix2d stationary_moment(const SddeSystem& sys, LaplaceProvider& lap) {
    const CharFnEvaluation ev = eval_charfn(sys, Complex(0.0, 0.0), lap);
    if (std::abs(ev.H_val) < 1e-8)
        throw std::runtime_error("charfn: H(0) near zero, no stationary moment");

    Eigen::Vector2cd pvec = Eigen::Vector2cd::Zero();
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < sys.k; ++k) pvec(i) += sys.noise_mu(i, k) * sys.noise_mu(i, k);

    const Eigen::Vector2cd mdiag =
        (Eigen::Matrix2cd::Identity() - ev.D_mat).inverse() * (ev.A_mat * pvec);
    const Eigen::Vector2cd spq = ev.S_mat * mdiag;
    const ProductTables& tab = lap.tables(Complex(0.0, 0.0));
    Complex m12 = 0.0;
    for (int p = 0; p < 2; ++p) m12 += plain_at(tab, 2, 0, p, 1, p) * spq(p);

    Eigen::Matrix2d m;
    m << mdiag(0).real(), m12.real(), m12.real(), mdiag(1).real();
    return m;
}

} // namespace sdde
