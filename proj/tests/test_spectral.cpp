#include <cmath>
#include <complex>

#include <doctest.h>

#include "helpers.hpp"
#include "sdde/dde.hpp"
#include "sdde/spectral.hpp"

using namespace sdde;
using testing::diag_decoupled;
using testing::make_system;
using testing::scalar_embed;

TEST_SUITE("spectral") {

TEST_CASE("quasi-polynomial coefficients and evaluation agree with det") {
    SddeSystem s = make_system(2, 2);
    s.drift_A << -2.0, 0.5, -0.3, -1.5;
    s.drift_B << -0.4, 0.2, 0.1, -0.3;
    CharCoefficients2D cc = char_coefficients(s);
    CHECK(cc.a == doctest::Approx(3.5));
    CHECK(cc.r == doctest::Approx(0.12 - 0.02));
    for (Complex lam : {Complex(0.3, 1.1), Complex(-1.0, -4.0), Complex(2.0, 0.0)}) {
        const Complex direct = eval_h(s, lam);
        CHECK(std::abs(eval_h_2d(cc, lam) - direct) < 1e-10 * (1.0 + std::abs(direct)));
    }
}

TEST_CASE("rightmost root of the pure-delay pair (Lambert-W oracle)") {
    // h = (lambda + e^{-lambda})^2; rightmost zeros at W(-1).
    SddeSystem s = make_system(2, 2);
    s.drift_B = -Eigen::MatrixXd::Identity(2, 2);
    SpectralSummary sum = rightmost_root(s);
    CHECK(sum.any_roots);
    CHECK(sum.alpha0 == doctest::Approx(-0.3181315052047641).epsilon(1e-7));
    bool found_pair = false;
    for (const RootRecord& r : sum.roots)
        if (std::abs(r.lambda.real() - sum.alpha0) < 1e-6 &&
            std::abs(std::abs(r.lambda.imag()) - 1.3372357014306895) < 1e-6)
            found_pair = true;
    CHECK(found_pair);
}

TEST_CASE("no delay reduces to drift eigenvalues") {
    SddeSystem s = make_system(2, 2);
    s.drift_A << -2.0, 1.0, 0.0, -0.5;
    SpectralSummary sum = rightmost_root(s);
    CHECK(std::abs(sum.alpha0 - (-0.5)) < 1e-9);
}

TEST_CASE("unstable delay strength crosses zero") {
    // lambda = -2 e^{-lambda} has its rightmost pair in the right half plane
    // (gain above pi/2); cross-check the sign against the simulated grid.
    SddeSystem s = make_system(2, 2);
    s.drift_B = -2.0 * Eigen::MatrixXd::Identity(2, 2);
    SpectralSummary sum = rightmost_root(s);
    CHECK(sum.alpha0 > 1e-3);
    FundamentalGrid g = fundamental_matrix(s, 1.0 / 64.0, 30.0);
    CHECK(measured_growth_rate(g, 5.0, 28.0) == doctest::Approx(sum.alpha0).epsilon(0.1));
}

TEST_CASE("winding number self-check on a polynomial") {
    Analytic f = [](Complex z) { return z * z + 1.0; };
    ScanRegion r;
    r.re_min = -1.0;
    r.re_max = 1.0;
    r.omega_max = 2.0;
    CHECK(winding_number(f, r) == 2);

    ScanRegion off;
    off.re_min = 2.0;
    off.re_max = 4.0;
    off.omega_max = 1.0;
    CHECK(winding_number(f, off) == 0);
}

TEST_CASE("roots_in_region finds all polynomial roots") {
    const Complex r1(0.3, 0.0), r2(-0.7, 0.2), r3(-0.7, -0.2);
    Analytic f = [&](Complex z) { return (z - r1) * (z - r2) * (z - r3); };
    ScanRegion region;
    region.re_min = -2.0;
    region.re_max = 1.0;
    region.omega_max = 1.5;
    RootScanOptions opts;
    opts.cell_radius = 1e-6;
    std::vector<RootRecord> roots = roots_in_region(f, region, opts);
    REQUIRE(roots.size() == 3);
    CHECK(std::abs(roots[0].lambda - r3) < 1e-8);
    CHECK(std::abs(roots[1].lambda - r2) < 1e-8);
    CHECK(std::abs(roots[2].lambda - r1) < 1e-8);
}

TEST_CASE("real roots of h for a diagonal drift") {
    SddeSystem s = make_system(2, 2);
    s.drift_A << -1.0, 0.0, 0.0, -2.0;
    std::vector<double> roots = real_roots_of_h(s, -3.0, 0.5);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == doctest::Approx(-2.0).epsilon(1e-8));
    CHECK(roots[1] == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("degenerate deterministic solution detection") {
    // Noise only in component 1: e^{-2t} e_2 solves the equation unperturbed.
    AssumptionHReport rep = check_assumption_h(scalar_embed(-1.0, 0.0, 1.5));
    CHECK(rep.holds);
    CHECK(rep.lambda == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(std::abs(rep.c(0)) < 1e-6);

    // Both channels active: no direction is noise-free.
    CHECK_FALSE(check_assumption_h(diag_decoupled(-1.0, -1.0, 1.6, 0.5)).holds);

    // Additive noise always breaks the degeneracy.
    CHECK_FALSE(check_assumption_h(diag_decoupled(-1.0, -1.0, 0.0, 0.0, 0, 0, 1.0, 0.0)).holds);
}

TEST_CASE("h is conjugate symmetric") {
    SddeSystem s = make_system(2, 2);
    s.drift_A << -1.0, 0.3, 0.2, -2.0;
    s.drift_B << -0.5, 0.0, 0.1, -0.2;
    for (Complex lam : {Complex(0.2, 1.7), Complex(-0.9, 5.0)})
        CHECK(std::abs(eval_h(s, std::conj(lam)) - std::conj(eval_h(s, lam))) < 1e-12);
}

} // TEST_SUITE
