#include "sdde/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace sdde {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct ContourNearZero : std::runtime_error {
    ContourNearZero() : std::runtime_error("spectral: contour passes near a zero") {}
};

// Total change of arg(f) along the straight segment [za, zb], tracked by
// recursive subdivision so each accepted sub-segment turns by less than pi/2.
// Throws ContourNearZero when |f| drops to the detection floor on the contour.
class PhaseTracker {
public:
    PhaseTracker(const Analytic& f, double zero_floor) : f_(f), floor_(zero_floor) {}

    double edge(Complex za, Complex zb) {
        const Complex fa = eval(za);
        const Complex fb = eval(zb);
        return segment(za, fa, zb, fb, 0);
    }

private:
    Complex eval(Complex z) {
        const Complex v = f_(z);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::runtime_error("spectral: evaluator returned a non-finite value");
        if (std::abs(v) < floor_) throw ContourNearZero{};
        return v;
    }

    double segment(Complex za, Complex fa, Complex zb, Complex fb, int depth) {
        const double d = std::arg(fb / fa);
        if (std::abs(d) < 0.45 * kPi && depth > 0) return d;
        if (depth > 48) throw std::runtime_error("spectral: winding count unstable");
        const Complex zm = 0.5 * (za + zb);
        const Complex fm = eval(zm);
        return segment(za, fa, zm, fm, depth + 1) + segment(zm, fm, zb, fb, depth + 1);
    }

    const Analytic& f_;
    double floor_;
};

int winding_rect(const Analytic& f, double x0, double x1, double y0, double y1,
                 double zero_floor) {
    PhaseTracker tracker(f, zero_floor);
    const Complex c1(x0, y0), c2(x1, y0), c3(x1, y1), c4(x0, y1);
    const double total =
        tracker.edge(c1, c2) + tracker.edge(c2, c3) + tracker.edge(c3, c4) + tracker.edge(c4, c1);
    const double w = total / (2.0 * kPi);
    const long rounded = std::lround(w);
    if (std::abs(w - rounded) > 0.25) throw std::runtime_error("spectral: winding count unstable");
    return static_cast<int>(rounded);
}

struct Cell {
    double x0, x1, y0, y1;
    int count;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double radius() const { return 0.5 * std::hypot(width(), height()); }
    Complex center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
};

Complex numeric_derivative(const Analytic& f, Complex z) {
    const double h = 1e-6 * (1.0 + std::abs(z));
    return (f(z + h) - f(z - h)) / (2.0 * h);
}

RootRecord polish(const Analytic& f, const RootScanOptions& opts, const Cell& cell) {
    Complex z = cell.center();
    Complex fz = f(z);
    const double leash = 10.0 * std::max(cell.radius(), 1e-12);
    for (int it = 0; it < 80 && std::abs(fz) > opts.root_tol; ++it) {
        const Complex dz =
            opts.derivative ? opts.derivative(z) : numeric_derivative(f, z);
        if (std::abs(dz) == 0.0) break;
        Complex step = fz / dz;
        // multiplicity > 1 slows plain Newton down; an over-relaxed step of
        // the winding count recovers quadratic convergence
        if (cell.count > 1) step *= static_cast<double>(cell.count);
        const Complex znew = z - step;
        if (std::abs(znew - cell.center()) > leash) break;
        z = znew;
        fz = f(z);
    }
    RootRecord rec;
    rec.lambda = z;
    rec.residual = std::abs(fz);
    rec.confidence_radius = std::max(cell.radius(), std::abs(z - cell.center()));
    rec.multiplicity = cell.count;
    return rec;
}

// Winding count with retry: when the contour grazes a zero, the rectangle is
// inflated by small multiples of `pad` until the count stabilizes.
int winding_with_nudge(const Analytic& f, Cell& cell, double zero_floor, double pad) {
    for (int attempt = 0; attempt < 6; ++attempt) {
        try {
            return winding_rect(f, cell.x0, cell.x1, cell.y0, cell.y1, zero_floor);
        } catch (const ContourNearZero&) {
            const double d = pad * (attempt + 1);
            cell.x0 -= d;
            cell.x1 += d;
            cell.y0 -= d;
            cell.y1 += d;
        }
    }
    throw std::runtime_error("spectral: contour repeatedly passes near a zero");
}

} // namespace

Complex eval_h(const SddeSystem& sys, Complex lambda) {
    const Eigen::Index n = sys.dim();
    Eigen::MatrixXcd delta = lambda * Eigen::MatrixXcd::Identity(n, n);
    delta -= sys.drift_A.cast<Complex>();
    delta -= std::exp(-lambda) * sys.drift_B.cast<Complex>();
    return delta.determinant();
}

CharCoefficients2D char_coefficients(const SddeSystem& sys) {
    if (sys.dim() != 2) throw std::invalid_argument("spectral: char_coefficients needs n = 2");
    const Eigen::MatrixXd& A = sys.drift_A;
    const Eigen::MatrixXd& B = sys.drift_B;
    CharCoefficients2D cc;
    cc.a = -A(0, 0) - A(1, 1);
    cc.b = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    cc.c = -B(0, 0) - B(1, 1);
    cc.d = A(0, 0) * B(1, 1) + A(1, 1) * B(0, 0) - A(0, 1) * B(1, 0) - A(1, 0) * B(0, 1);
    cc.r = B(0, 0) * B(1, 1) - B(0, 1) * B(1, 0);
    return cc;
}

Complex eval_h_2d(const CharCoefficients2D& cc, Complex l) {
    const Complex e = std::exp(-l);
    return l * l + cc.a * l + cc.b + (cc.c * l + cc.d) * e + cc.r * e * e;
}

Complex eval_h_2d_deriv(const CharCoefficients2D& cc, Complex l) {
    const Complex e = std::exp(-l);
    return 2.0 * l + cc.a + (cc.c - cc.c * l - cc.d) * e - 2.0 * cc.r * e * e;
}

int winding_number(const Analytic& f, const ScanRegion& region, double func_scale) {
    return winding_rect(f, region.re_min, region.re_max, -region.omega_max, region.omega_max,
                        1e-13 * func_scale);
}

std::vector<RootRecord> roots_in_region(const Analytic& f, const ScanRegion& region,
                                        const RootScanOptions& opts) {
    const double zero_floor = 1e-13 * opts.func_scale;
    std::deque<Cell> work;
    {
        Cell root{region.re_min, region.re_max, -region.omega_max, region.omega_max, 0};
        root.count = winding_with_nudge(f, root, zero_floor, 1e-3 * root.radius() + 1e-9);
        if (root.count > 0) work.push_back(root);
    }

    std::vector<RootRecord> found;
    int budget = opts.max_cells;
    while (!work.empty()) {
        if (--budget < 0) throw std::runtime_error("spectral: cell budget exhausted");
        Cell cell = work.front();
        work.pop_front();
        if (cell.radius() <= opts.cell_radius) {
            found.push_back(polish(f, opts, cell));
            continue;
        }
        const bool split_x = cell.width() >= cell.height();
        // The split line is nudged when it lands on a zero.
        const double base = split_x ? 0.5 * (cell.x0 + cell.x1) : 0.5 * (cell.y0 + cell.y1);
        const double span = split_x ? cell.width() : cell.height();
        bool done = false;
        for (int attempt = 0; attempt < 6 && !done; ++attempt) {
            const double shift = (attempt == 0) ? 0.0
                                                : span * 0.02 * ((attempt % 2) ? 1.0 : -1.0) *
                                                      ((attempt + 1) / 2);
            const double mid = base + shift;
            Cell a = cell, b = cell;
            if (split_x) {
                a.x1 = mid;
                b.x0 = mid;
            } else {
                a.y1 = mid;
                b.y0 = mid;
            }
            try {
                a.count = winding_rect(f, a.x0, a.x1, a.y0, a.y1, zero_floor);
                b.count = winding_rect(f, b.x0, b.x1, b.y0, b.y1, zero_floor);
            } catch (const ContourNearZero&) {
                continue;
            }
            if (a.count + b.count != cell.count) continue; // unstable split, move the line
            if (a.count > 0) work.push_back(a);
            if (b.count > 0) work.push_back(b);
            done = true;
        }
        if (!done) throw std::runtime_error("spectral: could not split cell away from zeros");
    }

    std::sort(found.begin(), found.end(), [](const RootRecord& u, const RootRecord& v) {
        if (u.lambda.real() != v.lambda.real()) return u.lambda.real() < v.lambda.real();
        return u.lambda.imag() < v.lambda.imag();
    });
    return found;
}

double root_modulus_bound(const SddeSystem& sys, double re_min) {
    return l1_norm(sys.drift_A) + l1_norm(sys.drift_B) * std::exp(-std::min(re_min, 0.0)) + 1.0;
}

SpectralSummary rightmost_root(const Analytic& f, const ScanRegion& region,
                               const RootScanOptions& opts) {
    SpectralSummary summary;
    summary.scan_region = region;
    summary.roots = roots_in_region(f, region, opts);
    summary.any_roots = !summary.roots.empty();
    summary.alpha0 = -std::numeric_limits<double>::infinity();
    for (const auto& r : summary.roots) summary.alpha0 = std::max(summary.alpha0, r.lambda.real());
    return summary;
}

SpectralSummary rightmost_root(const SddeSystem& sys, double root_tol) {
    const double na = l1_norm(sys.drift_A);
    const double nb = l1_norm(sys.drift_B);
    // Any root satisfies Re l <= mu(A) + ||B|| e^{-Re l}, so for Re l >= 0 the
    // real part is at most ||A|| + ||B||.
    const double re_max = std::max(2.0, na + nb + 0.5);

    const bool n2 = sys.dim() == 2;
    CharCoefficients2D cc;
    if (n2) cc = char_coefficients(sys);
    Analytic f = n2 ? Analytic([cc](Complex l) { return eval_h_2d(cc, l); })
                    : Analytic([&sys](Complex l) { return eval_h(sys, l); });

    RootScanOptions opts;
    opts.root_tol = root_tol;
    opts.cell_radius = 1e-5;
    if (n2) opts.derivative = [cc](Complex l) { return eval_h_2d_deriv(cc, l); };

    double re_min = -3.0;
    for (int widen = 0; widen < 5; ++widen) {
        ScanRegion region;
        region.re_min = re_min;
        region.re_max = re_max;
        region.omega_max = std::min(200.0, root_modulus_bound(sys, re_min));
        // |h| ~ |l|^n dominates on the far boundary.
        opts.func_scale = std::pow(region.omega_max, static_cast<double>(sys.dim()));
        SpectralSummary summary = rightmost_root(f, region, opts);
        if (summary.any_roots) return summary;
        if (nb == 0.0 && widen >= 1) return summary; // pure polynomial, genuinely no roots left
        re_min *= 2.0;
    }
    throw std::runtime_error("spectral: no characteristic roots found in any scan region");
}

std::vector<double> real_roots_of_h(const SddeSystem& sys, double re_min, double re_max,
                                    double tol) {
    const bool n2 = sys.dim() == 2;
    CharCoefficients2D cc;
    if (n2) cc = char_coefficients(sys);
    auto hr = [&](double x) -> double {
        return n2 ? eval_h_2d(cc, Complex(x, 0)).real() : eval_h(sys, Complex(x, 0)).real();
    };

    const double step = 1e-3;
    std::vector<double> roots;
    auto push_unique = [&](double x) {
        for (double r : roots)
            if (std::abs(r - x) < 1e-6) return;
        roots.push_back(x);
    };

    double xa = re_min;
    double fa = hr(xa);
    const auto nsteps = static_cast<long>(std::ceil((re_max - re_min) / step));
    std::vector<double> samples(static_cast<size_t>(nsteps) + 1);
    samples[0] = fa;
    for (long i = 1; i <= nsteps; ++i) {
        const double xb = std::min(re_max, re_min + i * step);
        double fb = hr(xb);
        samples[static_cast<size_t>(i)] = fb;
        if (fa == 0.0) push_unique(xa);
        if (fa * fb < 0.0) {
            double lo = xa, hi = xb, flo = fa;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = hr(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (flo * fm < 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            push_unique(0.5 * (lo + hi));
        }
        xa = xb;
        fa = fb;
    }
    // tangential (even-multiplicity) zeros: local minima of |h| near zero
    for (long i = 1; i < nsteps; ++i) {
        const double f0 = std::abs(samples[static_cast<size_t>(i - 1)]);
        const double f1 = std::abs(samples[static_cast<size_t>(i)]);
        const double f2 = std::abs(samples[static_cast<size_t>(i + 1)]);
        if (f1 <= f0 && f1 <= f2 && f1 < 1e-4) {
            // golden-section refinement of |h|
            double lo = re_min + (i - 1) * step, hi = re_min + (i + 1) * step;
            for (int it = 0; it < 120; ++it) {
                const double m1 = lo + 0.382 * (hi - lo);
                const double m2 = lo + 0.618 * (hi - lo);
                if (std::abs(hr(m1)) < std::abs(hr(m2)))
                    hi = m2;
                else
                    lo = m1;
            }
            const double x = 0.5 * (lo + hi);
            if (std::abs(hr(x)) < tol) push_unique(x);
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

AssumptionHReport check_assumption_h(const SddeSystem& sys, double tol) {
    AssumptionHReport rep;
    if (!sys.noise_mu.isZero(0.0)) return rep; // mu != 0 precludes the degenerate solution

    const double na = l1_norm(sys.drift_A);
    const double nb = l1_norm(sys.drift_B);
    const double re_max = std::max(2.0, na + nb + 0.5);
    const auto roots = real_roots_of_h(sys, -12.0, re_max);
    const Eigen::Index n = sys.dim();

    for (double l : roots) {
        Eigen::MatrixXd delta = l * Eigen::MatrixXd::Identity(n, n) - sys.drift_A -
                                std::exp(-l) * sys.drift_B;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(delta, Eigen::ComputeFullV);
        const Eigen::VectorXd c = svd.matrixV().col(n - 1);
        const double delta_resid = (delta * c).lpNorm<1>();
        if (delta_resid > tol * c.lpNorm<1>() * (1.0 + na + nb)) continue;

        double noise_resid = 0.0;
        const double e = std::exp(-l);
        for (int k = 0; k < sys.k; ++k)
            for (int row = 0; row < sys.n; ++row) {
                double acc = 0.0;
                for (int j = 0; j < sys.n; ++j)
                    acc += (sys.noise_sigma(row, j, k) + e * sys.noise_eta(row, j, k)) * c(j);
                noise_resid = std::max(noise_resid, std::abs(acc));
            }
        if (noise_resid < tol * c.lpNorm<1>()) {
            rep.holds = true;
            rep.lambda = l;
            if (n == 2) rep.c = Eigen::Vector2d(c(0), c(1));
            rep.residual = std::max(delta_resid, noise_resid);
            return rep;
        }
        rep.residual = std::max(rep.residual, noise_resid);
    }
    return rep;
}

} // namespace sdde
