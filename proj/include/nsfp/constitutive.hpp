#pragma once

#include <array>
#include <functional>
#include <string>

#include "nsfp/errors.hpp"

namespace nsfp {

/// Boundary heat-transfer coefficient model: Stefan-Boltzmann-like cubic
/// growth in the temperature, or a bounded temperature-independent value.
enum class DVariant { TEMP_DEPENDENT, TEMP_INDEPENDENT };

/// Constitutive constants of the fluid model. Pressure, internal energy and
/// entropy are the gamma-law / radiative forms
///   p = rho^gamma + rho*theta + (a_rad/3) theta^4
///   e = rho^(gamma-1)/(gamma-1) + c_v*theta + (a_rad/rho) theta^4
///   s = ln(theta^c_v / rho) + (4 a_rad/3) theta^3 / rho
/// and the transport coefficients are the minimal affine/cubic members of the
/// admissible class:
///   mu = mu0 (1+theta), eta = eta0 (1+theta), kappa = kappa0 (1+theta^3),
///   d  = (3/2) d0 (1+theta^3)   (TEMP_DEPENDENT)
///   d  = d0                     (TEMP_INDEPENDENT)
struct ConstitutiveParams {
    double gamma = 1.7;      ///< adiabatic exponent, > 1
    double c_v = 1.0;        ///< specific heat, > 0
    double a_rad = 1.0;      ///< radiation coefficient, >= 0
    double mu0 = 1.0;        ///< shear viscosity scale, > 0
    double eta0 = 0.0;       ///< bulk viscosity scale, >= 0
    double kappa0 = 1.0;     ///< heat conductivity scale, > 0
    double d0 = 1.0;         ///< boundary coefficient scale, > 0
    DVariant d_variant = DVariant::TEMP_DEPENDENT;

    /// Throws ParameterError on violated bounds.
    void validate() const;

    /// True when gamma lies in the regime paired with d_variant
    /// (TEMP_DEPENDENT: gamma > 23/15, TEMP_INDEPENDENT: gamma > 8/5).
    /// Out-of-regime construction is allowed but gets flagged in reports.
    bool regime_ok() const;
};

/// Pointwise thermodynamic state. At rho = 0 only the pressure survives;
/// e and s are flagged undefined (s diverges as rho -> 0).
struct ThermoEval {
    double p = 0.0;
    double e = 0.0;
    double s = 0.0;
    bool e_defined = true;
    bool s_defined = true;
};

/// Transport coefficients at a point.
struct TransportEval {
    double mu = 0.0;
    double eta = 0.0;
    double kappa = 0.0;
    double d = 0.0;
};

/// Viscous stress and entropy-production density at a point.
struct DissipationEval {
    std::array<std::array<double, 3>, 3> stress{};
    double sigma_density = 0.0; ///< (1/theta)(S:grad_u + kappa |grad_theta|^2 / theta)
};

/// Evaluate p, e, s. Requires rho >= 0, theta > 0; rho = 0 yields only p.
ThermoEval thermo_eval(double rho, double theta, const ConstitutiveParams& params);

/// Central finite-difference residuals of the Gibbs relation
///   r_theta = theta ds/dtheta - de/dtheta
///   r_rho   = theta ds/drho   - de/drho - p d(1/rho)/drho
/// For the built-in model both vanish up to O(h^2) truncation.
std::array<double, 2> gibbs_residual(double rho, double theta,
                                     const ConstitutiveParams& params, double h);

/// Same residuals for caller-supplied (p, e, s) functions of (rho, theta).
/// Used by tests to verify that the residual detects broken thermodynamics.
std::array<double, 2> gibbs_residual(double rho, double theta, double h,
                                     const std::function<double(double, double)>& p_fn,
                                     const std::function<double(double, double)>& e_fn,
                                     const std::function<double(double, double)>& s_fn);

/// Evaluate mu, eta, kappa and the boundary coefficient d at temperature theta.
TransportEval transport_eval(double theta, const ConstitutiveParams& params);

/// Newtonian stress S = mu (grad_u + grad_u^T - (2/3) div u I) + eta div u I
/// and the entropy production density sigma >= 0.
DissipationEval dissipation_eval(double theta,
                                 const std::array<std::array<double, 3>, 3>& grad_u,
                                 const std::array<double, 3>& grad_theta,
                                 const ConstitutiveParams& params);

/// sign(x) |x|^p; keeps audit functionals defined at small spectral
/// undershoots of the density without masking them.
double pow_signed(double x, double p);

} // namespace nsfp
