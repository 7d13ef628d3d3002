#pragma once

#include <functional>

#include "nsfp/errors.hpp"

namespace nsfp {

/// The transform Phi(g) = int_0^g ( kappa(e^z) e^z + delta e^{(B+1)z} + delta ) dz
/// that linearizes the temperature diffusion in log-temperature variables.
/// Phi' >= delta > 0 everywhere, so Phi is an increasing bijection of R.
struct KirchhoffSpec {
    double delta = 1e-2;   ///< > 0
    double B = 6.0;        ///< >= 2
    double kappa0 = 1.0;   ///< scale of the default cubic model kappa = kappa0 (1+theta^3)
    /// Optional replacement conductivity theta -> kappa(theta). When set, the
    /// forward transform falls back to adaptive quadrature.
    std::function<double(double)> kappa_override;

    void validate() const;
};

struct PhiEval {
    double value;
    double derivative;
};

/// Forward transform and its derivative at g. Closed form for the default
/// cubic kappa; adaptive quadrature (relative error <= 1e-12) otherwise.
/// Throws a DomainError when the exponentials overflow the double range.
PhiEval phi_eval(double g, const KirchhoffSpec& spec);

/// Inverse transform: the unique g with Phi(g) = y, to
/// |Phi(g) - y| <= 1e-10 max(1, |y|). Bracketing plus safeguarded Newton.
double phi_inverse(double y, const KirchhoffSpec& spec);

} // namespace nsfp
