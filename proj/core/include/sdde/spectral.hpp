#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sdde/model.hpp"

namespace sdde {

/// Coefficients of the 2-D characteristic quasi-polynomial
///   h(l) = l^2 + a l + b + (c l + d) e^{-l} + r e^{-2l}.
struct CharCoefficients2D {
    double a = 0, b = 0, c = 0, d = 0, r = 0;
};

struct RootRecord {
    Complex lambda;
    double residual = 0.0;          ///< |f(lambda)| after polish
    double confidence_radius = 0.0; ///< localization radius from the bisection cell
    int multiplicity = 1;           ///< winding count of the final cell
};

struct ScanRegion {
    double re_min = -5.0;
    double re_max = 2.0;
    double omega_max = 200.0;
};

struct SpectralSummary {
    double alpha0 = 0.0;           ///< rightmost real part; -inf marker when no roots
    bool any_roots = false;
    std::vector<RootRecord> roots; ///< sorted lexicographically (Re, Im)
    ScanRegion scan_region;
};

struct AssumptionHReport {
    bool holds = false;
    double lambda = 0.0;      ///< witnessing real root when holds
    Eigen::Vector2d c{0, 0};  ///< null direction of Delta(lambda)
    double residual = 0.0;
};

using Analytic = std::function<Complex(Complex)>;

/// Characteristic function h(l) = det(l I - A - B e^{-l}).
Complex eval_h(const SddeSystem& sys, Complex lambda);

/// Quasi-polynomial coefficients for n = 2.
CharCoefficients2D char_coefficients(const SddeSystem& sys);
Complex eval_h_2d(const CharCoefficients2D& cc, Complex lambda);
Complex eval_h_2d_deriv(const CharCoefficients2D& cc, Complex lambda);

struct RootScanOptions {
    double root_tol = 1e-9;       ///< residual target |f(root)|
    double cell_radius = 1e-4;    ///< bisection stops when a cell fits in this radius
    double func_scale = 1.0;      ///< magnitude scale of f, used for on-contour zero detection
    int max_cells = 20000;
    /// Analytic derivative for Newton polish; central differences when absent.
    std::function<Complex(Complex)> derivative;
};

/// Finds all zeros of an analytic function in a rectangle by argument-principle
/// winding counts over a bisection tree, each zero polished by Newton.
/// Throws when a winding count cannot be stabilized even after nudging the
/// contour away from near-zeros.
std::vector<RootRecord> roots_in_region(const Analytic& f, const ScanRegion& region,
                                        const RootScanOptions& opts = {});

/// Winding number of f along the rectangle boundary (exposed for self-checks).
int winding_number(const Analytic& f, const ScanRegion& region, double func_scale = 1.0);

/// Rightmost zero of h for the given system: picks a scan region from
/// Gershgorin-type bounds, widens it downward until a root is captured (or
/// concludes the region is zero-free, which cannot happen for h when the
/// quasi-polynomial is nontrivial).
SpectralSummary rightmost_root(const SddeSystem& sys, double root_tol = 1e-9);

/// Rightmost zero of a caller-supplied analytic function over an explicit
/// region. no_roots is reported through any_roots = false.
SpectralSummary rightmost_root(const Analytic& f, const ScanRegion& region,
                               const RootScanOptions& opts = {});

/// Real zeros of h on [re_min, re_max] (used by the degeneracy check).
std::vector<double> real_roots_of_h(const SddeSystem& sys, double re_min, double re_max,
                                    double tol = 1e-9);

/// Checks whether the system admits a deterministic exponential solution
/// e^{l t} c (mu = 0, c in the kernel of Delta(l) for a real root l, and the
/// multiplicative noise annihilates c).
AssumptionHReport check_assumption_h(const SddeSystem& sys, double tol = 1e-7);

/// Upper bound on |lambda| for zeros of h with Re(lambda) >= re_min.
double root_modulus_bound(const SddeSystem& sys, double re_min);

} // namespace sdde
