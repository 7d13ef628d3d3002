#pragma once

#include <array>

#include <Eigen/Dense>

#include "nsfp/field.hpp"

namespace nsfp {

/// A velocity-space field given per time slice: spatial coefficients in the
/// (orthonormalized) Dirichlet basis at every quadrature time node. This is
/// the natural carrier for discrete div^{-1} data, whose time dependence is
/// nodal rather than trigonometric.
struct SliceVelocity {
    BasesPtr bases;
    std::array<Eigen::MatrixXd, 3> coef; ///< n_time_nodes x n_space_velocity

    Nodal eval(int component) const;
    Nodal eval_grad(int axis, int component) const;
    Nodal eval_div() const;
    /// H^1_0 seminorm over space-time: sqrt( sum_t w_t |coef(t)|^2 )
    double grad_norm() const;
};

struct BogovskiiResult {
    SliceVelocity phi;
    double divergence_residual = 0.0; ///< || div phi - f ||_{L^2(S^1 x Omega)}
    double data_norm = 0.0;           ///< || f ||_{L^2}
    double grad_norm = 0.0;           ///< || grad phi ||_{L^2}
    bool regularized = false;         ///< normal equations needed a ridge
};

/// Least-squares right inverse of the divergence over the Dirichlet velocity
/// space, time slice by time slice. The data must have zero spatial mean at
/// every quadrature time (PreconditionError otherwise); the boundary values
/// vanish exactly by construction of the basis.
BogovskiiResult bogovskii_solve(BasesPtr bases, const Nodal& f, double mean_tol = 1e-10);

/// Field-based convenience overload.
BogovskiiResult bogovskii_solve(const PeriodicField& f, double mean_tol = 1e-10);

/// Project a slice field onto the trigonometric velocity time span (the
/// closest in-span test field for tested-identity audits).
PeriodicField project_to_velocity_span(const SliceVelocity& sv);

} // namespace nsfp
