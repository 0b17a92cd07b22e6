#pragma once

#include <complex>
#include <functional>

namespace sdde {

struct QuadResult {
    std::complex<double> value{0.0, 0.0};
    double error = 0.0;    ///< accumulated error estimate
    long evaluations = 0;  ///< integrand evaluations
    bool converged = false;
};

/// Adaptive Gauss-Kronrod 7-15 integration of a complex-valued integrand over
/// a finite interval. Subdivides the worst interval until the summed error
/// estimate falls below max(abs_tol, rel_tol * |value|) or the interval
/// budget is exhausted (in which case converged stays false).
QuadResult integrate(const std::function<std::complex<double>(double)>& f, double a, double b,
                     double abs_tol, double rel_tol = 0.0, int max_intervals = 4000);

} // namespace sdde
