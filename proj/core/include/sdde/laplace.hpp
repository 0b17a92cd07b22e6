#pragma once

#include <map>
#include <mutex>

#include "sdde/dde.hpp"
#include "sdde/model.hpp"

namespace sdde {

struct TransferMatrix {
    Complex lambda;
    Eigen::MatrixXcd entries; ///< Delta(lambda)^{-1}
    double residual = 0.0;    ///< ||Delta * entries - I|| (L1)
};

enum class ProductKind { plain, shifted };

/// Index tuple of a fundamental-matrix product transform:
///   plain:   L(X_i^h(t) X_j^p(t))(lambda)
///   shifted: L(X_i^h(t) X_j^p(t-1))(lambda)
/// The equal-superscript products of the 2-D theory are (i, k, j, k).
struct ProductIndex {
    ProductKind kind = ProductKind::plain;
    int i = 0, h = 0, j = 0, p = 0;
};

struct ProductTransform {
    Complex lambda;
    ProductIndex index;
    Complex value;
    double quad_error = 0.0;
};

/// All product transforms of one system at one lambda, indexed as
/// plain(i*n+j, h*n+p) = L(X_i^h X_j^p), likewise for shifted.
struct ProductTables {
    Complex lambda;
    Eigen::MatrixXcd plain;
    Eigen::MatrixXcd shifted;
    double quad_error = 0.0;

    Complex get(const ProductIndex& ix, int n) const {
        const auto row = static_cast<Eigen::Index>(ix.i) * n + ix.j;
        const auto col = static_cast<Eigen::Index>(ix.h) * n + ix.p;
        return ix.kind == ProductKind::plain ? plain(row, col) : shifted(row, col);
    }
};

struct LaplaceOptions {
    double quad_tol = 1e-9;
    double alpha0 = 0.0;      ///< rightmost characteristic root (must be < 0)
    double omega_max = 6400.0; ///< hard cap on the truncation frequency
};

/// Delta(lambda)^{-1} with a residual check. Throws when lambda is within
/// tolerance of a characteristic root.
TransferMatrix transfer(const SddeSystem& sys, Complex lambda);

/// Frequency-domain product transforms at one lambda: (1/2pi) integral of
/// T(iw) x T(lambda-iw) entry products over w, computed with a second-order
/// rational model of T subtracted (integrated analytically) so the numeric
/// remainder decays like 1/w^4. Requires Re lambda > 2*alpha0 + margin.
ProductTables product_tables_freq(const SddeSystem& sys, Complex lambda,
                                  const LaplaceOptions& opts);

/// Single product via the frequency-domain path.
ProductTransform product_transform_freq(const SddeSystem& sys, const ProductIndex& ix,
                                        Complex lambda, const LaplaceOptions& opts);

/// Independent oracle: composite quadrature of e^{-lambda t} X_i^h(t) X_j^p(t[-1])
/// on the fundamental-matrix grid plus an exponential-envelope tail bound.
/// Throws when the tail bound exceeds quad_tol (reporting the needed t_max).
ProductTransform product_transform_time(const FundamentalGrid& grid, const ProductIndex& ix,
                                        Complex lambda, double quad_tol = 1e-6);

/// Caches product tables per lambda for one system; computes alpha0 once.
/// Thread-safe; values are deterministic so recomputation is benign.
class LaplaceProvider {
public:
    explicit LaplaceProvider(const SddeSystem& sys, double quad_tol = 1e-9);

    const ProductTables& tables(Complex lambda);
    Complex value(const ProductIndex& ix, Complex lambda);
    double alpha0() const { return opts_.alpha0; }
    const SddeSystem& system() const { return sys_; }
    double quad_tol() const { return opts_.quad_tol; }

private:
    SddeSystem sys_;
    LaplaceOptions opts_;
    std::map<std::pair<double, double>, ProductTables> cache_;
    std::mutex mutex_;
};

} // namespace sdde
