#include "eulign/model.hpp"

namespace eulign {

std::vector<std::string> validate_kernel(const KernelSpec& spec, const std::string& key) {
    std::vector<std::string> errs;
    switch (spec.role) {
    case KernelRole::Alignment:
    case KernelRole::Repulsion:
        if (spec.k <= 0.0)
            errs.push_back(key + ".k must be positive");
        break;
    case KernelRole::Cohesion:
        if (spec.k >= 0.0)
            errs.push_back(key + ".k must be negative");
        break;
    }
    if (spec.family == KernelFamily::Yukawa) {
        // e^{-lambda r} with lambda < 0 grows and is non-integrable.
        if (spec.lambda <= 0.0)
            errs.push_back(key + ".lambda must be positive for the Yukawa family");
    } else {
        if (spec.lambda < 2.0)
            errs.push_back(key + ".lambda (Bessel order) must be >= 2");
    }
    return errs;
}

std::vector<std::string> validate_model_params(const ModelParams& params, double s_max) {
    std::vector<std::string> errs;
    if (params.kappa_p < 0.0)
        errs.push_back("model.kappa_p must be >= 0");
    if (params.prop.s_eq <= 0.0)
        errs.push_back("model.equilibrium_speed must be positive");

    const int n = 1000;
    double prev = params.prop(0.0);
    double max_quot = 0.0;
    double prev_phi = 0.0; // s (1 - P(s)) at s = 0
    for (int i = 1; i <= n; ++i) {
        const double s = s_max * double(i) / n;
        const double p = params.prop(s);
        if (p < prev - 1e-12) {
            errs.push_back("model.propulsion_profile: P must be nondecreasing on [0, s_max]");
            break;
        }
        const double phi = s * (1.0 - p);
        max_quot = std::max(max_quot, std::fabs(phi - prev_phi) / (s_max / n));
        prev = p;
        prev_phi = phi;
    }
    if (!std::isfinite(max_quot))
        errs.push_back("model.propulsion_profile: v (1 - P(|v|)) has unbounded difference quotients");
    return errs;
}

} // namespace eulign
