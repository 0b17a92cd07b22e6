#include "sdde/verdict.hpp"

#include <cmath>
#include <stdexcept>

#include "sdde/laplace.hpp"

namespace sdde {
namespace {

double bk_lhs(const SddeSystem& sys) {
    double lhs = 0.0;
    for (int i = 0; i < sys.n; ++i) {
        double row = 0.0;
        for (int j = 0; j < sys.n; ++j)
            for (int k = 0; k < sys.k; ++k)
                row += std::abs(sys.noise_sigma(i, j, k)) + std::abs(sys.noise_eta(i, j, k));
        lhs += row * row;
    }
    return lhs;
}

} // namespace

const char* to_string(Conclusion c) {
    switch (c) {
    case Conclusion::bounded: return "bounded";
    case Conclusion::unbounded: return "unbounded";
    default: return "inconclusive";
    }
}

const char* to_string(Rule r) {
    switch (r) {
    case Rule::first_moment_sign: return "first-moment-sign";
    case Rule::direct_instability: return "direct-instability";
    case Rule::charfn_bounded: return "charfn-bounded";
    case Rule::charfn_unbounded: return "charfn-unbounded";
    case Rule::envelope_certificate: return "envelope-certificate";
    default: return "none-applicable";
    }
}

BkCertificate bk_search(const SddeSystem& sys, const FundamentalGrid& grid, double alpha0) {
    if (!(alpha0 < 0.0)) throw std::invalid_argument("verdict: bk_search requires alpha0 < 0");
    const double lhs = bk_lhs(sys);
    BkCertificate best;
    best.lhs = lhs;
    best.alpha = alpha0 * (1.0 - 1e-3);
    bool have = false;
    for (int j = 1; j <= 60; ++j) {
        const double alpha = alpha0 * (1.0 - 1e-3) * j / 60.0;
        double k_bar;
        try {
            k_bar = fit_envelope(grid, alpha);
        } catch (const std::exception&) {
            continue; // alpha at or below the measured decay rate of the grid
        }
        const double rhs = -alpha / (2.0 * k_bar * k_bar);
        if (!have || rhs - lhs > best.rhs - best.lhs) {
            best.alpha = alpha;
            best.k_bar = k_bar;
            best.rhs = rhs;
            have = true;
        }
    }
    best.satisfied = have && best.lhs < best.rhs;
    return best;
}

Verdict decide(const SddeSystem& sys, const AnalysisSettings& settings) {
    sys.validate();
    Verdict v;
    v.noise_class = classify_noise(sys);
    v.alpha0 = rightmost_root(sys, settings.root_tol).alpha0;

    if (v.noise_class == NoiseClass::deterministic) {
        v.conclusion = Conclusion::bounded;
        v.rule = Rule::none_applicable;
        v.caveats.push_back("no stochastic forcing; the second moment is identically zero");
        return v;
    }

    if (v.noise_class == NoiseClass::additive) {
        if (std::abs(v.alpha0) <= critical_tol) {
            v.conclusion = Conclusion::inconclusive;
            v.caveats.push_back("alpha0 within the critical dead band");
            return v;
        }
        v.conclusion = v.alpha0 < 0.0 ? Conclusion::bounded : Conclusion::unbounded;
        v.rule = Rule::first_moment_sign;
        return v;
    }

    const bool decoupled = is_decoupled_2d(sys);
    bool ah_holds = false;
    if (sys.n == 2) {
        v.assumption_h = check_assumption_h(sys);
        ah_holds = v.assumption_h->holds;
    }

    if (v.alpha0 > critical_tol) {
        if (decoupled && !ah_holds) {
            v.conclusion = Conclusion::unbounded;
            v.rule = Rule::direct_instability;
            return v;
        }
        v.conclusion = Conclusion::inconclusive;
        if (ah_holds)
            v.caveats.push_back(
                "degenerate deterministic solution exists; the unboundedness results exclude "
                "this case");
        else
            v.caveats.push_back("alpha0 > 0 but the instability result needs 2-D decoupled noise");
        return v;
    }
    if (std::abs(v.alpha0) <= critical_tol) {
        v.conclusion = Conclusion::inconclusive;
        v.caveats.push_back("alpha0 within the critical dead band");
        return v;
    }

    // alpha0 < -critical_tol from here on
    if (decoupled) {
        try {
            LaplaceProvider lap(sys, settings.quad_tol);
            const MomentSpectralSummary ms = compute_beta0(sys, lap);
            v.alpha_bar0 = ms.alpha_bar0;
            v.beta0 = ms.beta0;
            if (ms.alpha_bar0 < -critical_tol) {
                if (!ms.has_H_roots || ms.beta0 < -critical_tol) {
                    v.conclusion = Conclusion::bounded;
                    v.rule = Rule::charfn_bounded;
                    try {
                        v.m_inf = stationary_moment(sys, lap);
                    } catch (const std::exception& e) {
                        v.caveats.push_back(std::string("stationary moment unavailable: ") +
                                            e.what());
                    }
                    return v;
                }
                if (ms.beta0 > critical_tol && !ah_holds) {
                    v.conclusion = Conclusion::unbounded;
                    v.rule = Rule::charfn_unbounded;
                    return v;
                }
                if (std::abs(ms.beta0) <= critical_tol)
                    v.caveats.push_back("beta0 within the critical dead band");
            } else {
                v.caveats.push_back("alpha_bar0 not strictly negative; beta0 undefined");
            }
        } catch (const std::exception& e) {
            v.caveats.push_back(std::string("characteristic-function analysis failed: ") +
                                e.what());
        }
    }

    if (sys.n == 2) {
        try {
            const double t_env = std::max(settings.t_max, 20.0);
            const FundamentalGrid grid = fundamental_matrix(sys, settings.dt, t_env);
            v.bk = bk_search(sys, grid, v.alpha0);
            if (v.bk->satisfied) {
                v.conclusion = Conclusion::bounded;
                v.rule = Rule::envelope_certificate;
                return v;
            }
        } catch (const std::exception& e) {
            v.caveats.push_back(std::string("envelope certificate unavailable: ") + e.what());
        }
    }

    v.conclusion = Conclusion::inconclusive;
    v.rule = Rule::none_applicable;
    if (ah_holds)
        v.caveats.push_back(
            "degenerate deterministic solution exists; the unboundedness results exclude this "
            "case");
    return v;
}

} // namespace sdde
