#ifndef SHELLVK_SCALING_HPP
#define SHELLVK_SCALING_HPP

#include "shellvk/types.hpp"

#include <cmath>
#include <string>

namespace shellvk {

/// Thickness / energy scaling record. Under KappaH4 the energy scale is
/// e_h = kappa h^4 exactly; under SubH4 it is e_h = h^beta with beta > 4,
/// so e_h / h^4 -> 0 along any thickness sequence.
struct ScalingLaw {
    enum class Rule { KappaH4, SubH4 };

    Rule rule = Rule::KappaH4;
    Real h = 0.05;
    Real kappa = 1.0; // KappaH4 only
    Real beta = 5.0;  // SubH4 only
    Real e_h = 0.0;

    static ScalingLaw kappa_h4(Real kappa, Real h) {
        if (h <= 0 || kappa < 0) throw ConfigError("scaling needs h > 0, kappa >= 0");
        ScalingLaw s;
        s.rule = Rule::KappaH4;
        s.h = h;
        s.kappa = kappa;
        s.e_h = kappa * h * h * h * h;
        return s;
    }

    static ScalingLaw sub_h4(Real beta, Real h) {
        if (h <= 0 || beta <= 4) throw ConfigError("SubH4 needs beta > 4 and h > 0");
        ScalingLaw s;
        s.rule = Rule::SubH4;
        s.h = h;
        s.beta = beta;
        s.e_h = std::pow(h, beta);
        return s;
    }

    /// Amplitude of the scaled perturbations, sqrt(e_h)/h.
    Real eps() const { return std::sqrt(e_h) / h; }
    /// Effective sqrt(kappa) at this thickness, sqrt(e_h)/h^2; equals
    /// sqrt(kappa) exactly under KappaH4 and vanishes as h -> 0 under SubH4.
    Real sqrt_kappa_h() const { return std::sqrt(e_h) / (h * h); }

    std::string rule_name() const { return rule == Rule::KappaH4 ? "kappa_h4" : "sub_h4"; }
};

} // namespace shellvk

#endif
