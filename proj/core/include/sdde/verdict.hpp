#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sdde/charfn.hpp"
#include "sdde/dde.hpp"
#include "sdde/model.hpp"
#include "sdde/spectral.hpp"

namespace sdde {

enum class Conclusion { bounded, unbounded, inconclusive };
enum class Rule {
    first_moment_sign, ///< additive noise, sign of alpha0
    direct_instability, ///< alpha0 > 0 without a degenerate deterministic solution
    charfn_bounded,     ///< beta0 < 0 with alpha_bar0 < 0
    charfn_unbounded,   ///< beta0 > 0 without a degenerate deterministic solution
    envelope_certificate, ///< sufficient coefficient-smallness certificate
    none_applicable
};

const char* to_string(Conclusion c);
const char* to_string(Rule r);

struct BkCertificate {
    double alpha = 0.0; ///< envelope rate in (alpha0, 0), ||X(t)|| <= k_bar e^{alpha t}
    double k_bar = 1.0;
    double lhs = 0.0;   ///< squared row sums of the noise coefficients
    double rhs = 0.0;   ///< -alpha / (2 k_bar^2)
    bool satisfied = false;
};

struct Verdict {
    Conclusion conclusion = Conclusion::inconclusive;
    Rule rule = Rule::none_applicable;
    NoiseClass noise_class = NoiseClass::deterministic;
    double alpha0 = 0.0;
    std::optional<double> alpha_bar0;
    std::optional<double> beta0; ///< -inf marker when H has no roots
    std::optional<AssumptionHReport> assumption_h;
    std::optional<BkCertificate> bk;
    std::optional<Eigen::Matrix2d> m_inf;
    std::vector<std::string> caveats;
};

/// Dead band around zero for alpha0/beta0 inside which no conclusion is drawn
/// (the critical cases are genuinely open).
constexpr double critical_tol = 1e-4;

/// Scans alpha over (alpha0, 0), fits the grid envelope constant k_bar for
/// each, and returns the certificate maximizing rhs - lhs (possibly
/// unsatisfied; the criterion is sufficient only). Throws when alpha0 >= 0.
BkCertificate bk_search(const SddeSystem& sys, const FundamentalGrid& grid, double alpha0);

/// Applies the boundedness results in precedence order: additive sign rule,
/// direct instability, characteristic-function sign, envelope certificate,
/// otherwise inconclusive with all computed evidence attached.
Verdict decide(const SddeSystem& sys, const AnalysisSettings& settings = {});

} // namespace sdde
