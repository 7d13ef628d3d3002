#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsfp/bogovskii.hpp"
#include "nsfp/constitutive.hpp"
#include "nsfp/field.hpp"
#include "nsfp/kirchhoff.hpp"

namespace nsfp {

/// Regularization and resolution parameters of the approximation scheme.
struct ApproxParams {
    int N_t = 2;            ///< time modes
    int N_x = 3;            ///< spatial modes per axis
    double tau = 1e-3;      ///< >= 0, second-order time regularization of Z
    double zeta = 1e-2;     ///< > 0, artificial velocity/temperature time term
    double eps = 1e-4;      ///< > 0, parabolic regularization of the density
    double delta = 1e-2;    ///< > 0, pressure/heat-flux regularization
    double Gamma = 4.0;     ///< >= 2*gamma, artificial pressure exponent
    double B_exp = 6.0;     ///< >= 2, Kirchhoff exponent
    double lambda = 1.0;    ///< target homotopy parameter in [0, 1]

    void validate(const ConstitutiveParams& cp) const;
    /// defaults tied to gamma: Gamma = max(2 gamma, 4), zeta = delta, eps = delta^2
    static ApproxParams defaults_for(const ConstitutiveParams& cp);
    KirchhoffSpec kirchhoff(const ConstitutiveParams& cp) const {
        return KirchhoffSpec{delta, B_exp, cp.kappa0, {}};
    }
};

/// Everything a solve needs.
struct Problem {
    ConstitutiveParams constitutive;
    DomainSpec domain;
    ApproxParams approx;

    void validate() const {
        constitutive.validate();
        domain.validate();
        approx.validate(constitutive);
    }
};

struct SolverControls {
    double omega = 0.5;    ///< damping in (0, 1]
    double tol = 1e-10;    ///< combined update/residual tolerance
    int max_iter = 200;
    int lambda_steps = 5;  ///< homotopy intervals; 1 = direct solve at lambda target
};

struct IterationRecord {
    double lambda;
    int iter;
    double update_norm;
    double res_continuity;
    double res_momentum;
    double res_temperature;
    double min_rho;
    double min_theta;
};

/// Discrete approximate solution. theta is carried as ln(theta) coefficients
/// (theta = exp on evaluation, hence positive everywhere); z is the Kirchhoff
/// image actually solved for, kept so audits can re-check the identities the
/// scheme satisfies without re-solving.
struct ApproxState {
    BasesPtr bases;
    PeriodicField rho;
    PeriodicField u;
    PeriodicField ln_theta;
    PeriodicField z;
    std::vector<IterationRecord> trace;
    bool converged = false;
    std::string failure_reason;
    double min_rho = 0.0;
    double mass_err = 0.0;
    double lambda = 1.0; ///< homotopy value the state solves
};

// ---- nodal helpers shared by solvers and tests ----
Nodal theta_nodes(const PeriodicField& ln_theta);
/// body force at the quadrature nodes, one array per component
std::array<Nodal, 3> force_nodes(const Bases& b, const DomainSpec& domain);
/// strong residual of the regularized continuity equation at the nodes
Nodal continuity_residual_nodes(const PeriodicField& rho, const PeriodicField& u,
                                const Problem& problem);

/// Density from a given velocity: space-time Galerkin solve of
///   d_t rho + div(rho u) - eps lap rho + eps rho = eps m  (+ extra source)
/// with the Neumann condition built into the basis. The spatial mean is the
/// exact mode-0 identity, so int rho = M0 at every time.
PeriodicField solve_continuity(const PeriodicField& u_tilde, const Problem& problem,
                               const Nodal* extra_source = nullptr);

/// Velocity from (rho, u_tilde, theta_tilde): linear coercive system in the
/// orthonormal velocity basis, viscous + zeta d_t on the left, everything
/// else on the right exactly as the fixed-point map distributes it.
PeriodicField solve_momentum(const PeriodicField& rho, const PeriodicField& u_tilde,
                             const PeriodicField& ln_theta_tilde, const Problem& problem,
                             double lambda);

struct TemperatureSolve {
    PeriodicField z;        ///< Kirchhoff image
    PeriodicField ln_theta; ///< projection of Phi^{-1}(z)
    double pinned_compat = 0.0; ///< tau = 0: norm of the pinned null-mode data
};

/// Kirchhoff-transformed heat solve: SPD system for z, then
/// ln theta = Phi^{-1}(z) nodewise, projected. theta > 0 by construction.
TemperatureSolve solve_temperature(const PeriodicField& rho, const PeriodicField& u_tilde,
                                   const PeriodicField& ln_theta_tilde,
                                   const Problem& problem, double lambda,
                                   const Nodal* extra_source = nullptr);

/// Same equation with every temperature dependence (transport, sources,
/// boundary flux) implicit in z, solved by damped Newton; rho and u stay
/// lagged. The fixed-point driver uses this inside the outer loop: with the
/// lagged-theta map the zero mode of z responds to a theta perturbation with
/// gain ~ d |dOmega| / (tau |Omega|), which no outer damping can contract at
/// small tau. Fixed points coincide with the lagged form.
TemperatureSolve solve_temperature_coupled(const PeriodicField& rho,
                                           const PeriodicField& u_tilde,
                                           const PeriodicField& ln_theta_guess,
                                           const Problem& problem, double lambda);

/// Damped Picard iteration of the composed map with lambda continuation.
/// Non-convergence is returned as data (converged = false), not thrown;
/// NaN iterates abort with SolverError.
ApproxState fixed_point(const Problem& problem, const SolverControls& controls,
                        BasesPtr bases = nullptr,
                        const std::optional<ApproxState>& initial = std::nullopt);

} // namespace nsfp
