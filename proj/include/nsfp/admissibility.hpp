#pragma once

#include <string>
#include <vector>

#include "nsfp/errors.hpp"

namespace nsfp {

/// Which a-priori estimate chain applies: the one driven by cubic boundary
/// radiation (temperature-dependent d) or the bounded-d chain where the
/// Bogovskii exponent is pinned.
enum class RadiationCase { RADIATION, NO_RADIATION };

/// Which of the three terms of the exponent window attains the minimum.
enum class BindingTerm { PRESSURE_INTERPOLATION, DISCRIMINANT, RENORMALIZATION, FIXED };

std::string to_string(RadiationCase c);
std::string to_string(BindingTerm b);

/// Admissible range of the Bogovskii exponent a for a given gamma.
///
/// RADIATION: a in (1, min{(5g-3)/(3g), 1+(-5+sqrt(D_A))/(30g), (g+1)/g}),
/// nonempty exactly for gamma > 23/15.
/// NO_RADIATION: a = (5g-3)/(3g) fixed, admissible iff a*gamma > 5/3,
/// i.e. gamma > 8/5; gamma >= 2 is flagged outside the bounded-d derivation.
struct ExponentWindow {
    double gamma = 0.0;
    RadiationCase rad_case = RadiationCase::RADIATION;
    double a_low = 1.0;               ///< exclusive
    double a_high = 0.0;              ///< exclusive; meaningless when empty
    bool empty = true;                ///< RADIATION: no admissible a exists
    bool admissible = false;          ///< nonempty window / NO_RADIATION flag
    BindingTerm binding = BindingTerm::FIXED;
    double a_chosen = 0.0;            ///< midpoint default (NO_RADIATION: the fixed a)
    bool out_of_scope = false;        ///< NO_RADIATION with gamma >= 2
    double terms[3] = {0, 0, 0};      ///< RADIATION: the three candidate bounds
};

/// One strict inequality of the estimate chain, evaluated numerically.
struct ChainEntry {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    bool strict_ok = false;   ///< lhs < rhs with tolerance 0
    bool energy_exponent = false; ///< entry participates in the beta aggregate
};

/// Full numeric record of the estimate chain for one (gamma, a) pair.
struct ChainReport {
    double gamma = 0.0;
    double a = 0.0;
    RadiationCase rad_case = RadiationCase::RADIATION;
    ExponentWindow window;
    std::vector<ChainEntry> entries;
    double p_i = 0.0;      ///< interpolation exponent (3/2)(1 + gamma(a-1))
    double alpha = 0.0;    ///< interpolation weight
    bool p_i_valid = false; ///< p_i in (1, gamma)
    double beta = 0.0;     ///< largest energy exponent encountered
    bool admissible = false; ///< AND of all strict checks and beta < 1
};

/// D_A = 5 (180 gamma^2 - 456 gamma + 281); positive for gamma > 3/2.
double discriminant(double gamma);

/// Admissible window of the Bogovskii exponent for gamma and chain case.
ExponentWindow a_window(double gamma, RadiationCase rad_case);

/// p_i and alpha for a given (gamma, a); validity flag p_i in (1, gamma).
/// Values are returned even when a lies outside the window.
struct InterpolationExponents {
    double p_i;
    double alpha;
    bool valid;
};
InterpolationExponents interpolation_exponents(double gamma, double a);

/// Evaluate every strict inequality of the chain at (gamma, a).
ChainReport estimate_chain_report(double gamma, double a, RadiationCase rad_case);

/// Convenience: chain report at the window's default a (midpoint).
ChainReport estimate_chain_report(double gamma, RadiationCase rad_case);

} // namespace nsfp
