#include "nsfp/admissibility.hpp"

#include <algorithm>
#include <cmath>

namespace nsfp {

std::string to_string(RadiationCase c) {
    return c == RadiationCase::RADIATION ? "RADIATION" : "NO_RADIATION";
}

std::string to_string(BindingTerm b) {
    switch (b) {
    case BindingTerm::PRESSURE_INTERPOLATION: return "pressure_interpolation";
    case BindingTerm::DISCRIMINANT: return "discriminant";
    case BindingTerm::RENORMALIZATION: return "renormalization";
    case BindingTerm::FIXED: return "fixed";
    }
    return "?";
}

double discriminant(double gamma) {
    if (!(gamma > 1.0)) throw ParameterError("discriminant: gamma must be > 1");
    return 5.0 * (180.0 * gamma * gamma - 456.0 * gamma + 281.0);
}

ExponentWindow a_window(double gamma, RadiationCase rad_case) {
    if (!(gamma > 1.0)) throw ParameterError("a_window: gamma must be > 1");

    ExponentWindow w;
    w.gamma = gamma;
    w.rad_case = rad_case;

    if (rad_case == RadiationCase::NO_RADIATION) {
        w.a_chosen = (5.0 * gamma - 3.0) / (3.0 * gamma);
        w.a_low = w.a_high = w.a_chosen;
        // a*gamma computed as (5 gamma - 3)/3 so the flip sits exactly at 8/5
        const double a_gamma = (5.0 * gamma - 3.0) / 3.0;
        w.admissible = a_gamma > 5.0 / 3.0;
        w.empty = !w.admissible;
        w.binding = BindingTerm::FIXED;
        w.out_of_scope = gamma >= 2.0;
        return w;
    }

    const double d_a = discriminant(gamma);
    w.terms[0] = (5.0 * gamma - 3.0) / (3.0 * gamma);
    w.terms[1] = 1.0 + (-5.0 + std::sqrt(d_a)) / (30.0 * gamma);
    w.terms[2] = (gamma + 1.0) / gamma;
    w.a_high = std::min({w.terms[0], w.terms[1], w.terms[2]});
    // nonempty iff sqrt(D_A) > 5 iff 180 g^2 - 456 g + 276 > 0 iff (for g > 1)
    // 15 g > 23; the factored form keeps the flip exact at the boundary
    w.empty = !(15.0 * gamma - 23.0 > 0.0) || !(w.a_high > 1.0);
    w.admissible = !w.empty;
    if (w.a_high == w.terms[0]) w.binding = BindingTerm::PRESSURE_INTERPOLATION;
    else if (w.a_high == w.terms[1]) w.binding = BindingTerm::DISCRIMINANT;
    else w.binding = BindingTerm::RENORMALIZATION;
    w.a_chosen = w.empty ? 1.0 : 0.5 * (1.0 + w.a_high);
    return w;
}

InterpolationExponents interpolation_exponents(double gamma, double a) {
    if (!(gamma > 1.0)) throw ParameterError("interpolation_exponents: gamma must be > 1");
    InterpolationExponents out{};
    const double ga1 = gamma * (a - 1.0);
    out.p_i = 1.5 * (1.0 + ga1);
    out.alpha = gamma / (gamma - 1.0) * (3.0 * ga1 + 1.0) / (3.0 * ga1 + 3.0);
    out.valid = out.p_i > 1.0 && out.p_i < gamma;
    return out;
}

ChainReport estimate_chain_report(double gamma, double a, RadiationCase rad_case) {
    if (!(gamma > 1.0)) throw ParameterError("estimate_chain_report: gamma must be > 1");

    ChainReport rep;
    rep.gamma = gamma;
    rep.a = a;
    rep.rad_case = rad_case;
    rep.window = a_window(gamma, rad_case);

    const InterpolationExponents ie = interpolation_exponents(gamma, a);
    rep.p_i = ie.p_i;
    rep.alpha = ie.alpha;
    rep.p_i_valid = ie.valid;

    auto add = [&rep](const std::string& id, double lhs, double rhs, bool energy) {
        rep.entries.push_back({id, lhs, rhs, lhs < rhs, energy});
    };

    const double big_a = a * gamma;
    if (rad_case == RadiationCase::RADIATION) {
        add("kinetic_energy_absorption",
            1.0 / (5.0 * (gamma - 1.0)) + 1.0 / (3.0 * (gamma - 1.0)), 1.0, true);
        add("radiation_term_absorption",
            4.0 / 3.0 * gamma / (5.0 * (gamma - 1.0)), gamma, false);
        add("density_temperature_absorption",
            8.0 * gamma / (45.0 * (gamma - 1.0)), gamma, false);
        add("convective_quadratic",
            15.0 * big_a * big_a + big_a * (5.0 - 30.0 * gamma) + 33.0 * gamma - 23.0,
            0.0, false);
        add("pressure_test_radiation_exponent",
            0.25 + 1.0 / (5.0 * (gamma - 1.0)), 1.0, true);
        add("pressure_test_mixed_exponent",
            1.0 / (9.0 * (gamma - 1.0)) + 1.0 / (15.0 * (gamma - 1.0)), 1.0, true);
        add("pressure_test_forcing_exponent", 0.5, 1.0, true);
        // same content as convective_quadratic, normalized as a power of the energy
        add("convective_energy_exponent",
            ie.alpha * (1.0 + gamma * (a - 1.0)) / gamma *
                (5.0 * big_a - 5.0) / (5.0 * big_a - 6.0),
            1.0, true);
    } else {
        const double a_gamma = (5.0 * gamma - 3.0) / 3.0; // at the appendix's fixed a
        add("convective_energy_exponent",
            1.0 / gamma + (2.0 * gamma - 3.0) / (3.0 * gamma), 1.0, true);
        add("time_derivative_energy_exponent", 1.0 / gamma + (a - 1.0), 1.0, true);
        add("temperature_young_absorption",
            4.0 * big_a / (6.0 * (big_a - 1.0)), big_a, false);
        add("exponent_restriction", 5.0 / 3.0, a_gamma, false);
    }

    rep.beta = 0.0;
    bool all_ok = true;
    for (const auto& e : rep.entries) {
        all_ok = all_ok && e.strict_ok;
        if (e.energy_exponent) rep.beta = std::max(rep.beta, e.lhs / e.rhs);
    }
    rep.admissible = all_ok && rep.window.admissible && rep.beta < 1.0;
    if (rad_case == RadiationCase::RADIATION)
        rep.admissible = rep.admissible && a > 1.0 && a < rep.window.a_high && rep.p_i_valid;
    return rep;
}

ChainReport estimate_chain_report(double gamma, RadiationCase rad_case) {
    const ExponentWindow w = a_window(gamma, rad_case);
    return estimate_chain_report(gamma, w.a_chosen, rad_case);
}

} // namespace nsfp
