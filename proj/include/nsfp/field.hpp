#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsfp/basis.hpp"

namespace nsfp {

/// Coefficient tensor of a scalar or 3-vector field on S^1 x Omega.
/// Scalar fields live in the cosine (Neumann) basis, vector fields in the
/// Dirichlet velocity basis; both are exactly L-periodic by construction.
struct PeriodicField {
    enum class Kind { SCALAR, VELOCITY };

    Kind kind = Kind::SCALAR;
    BasesPtr bases;
    /// SCALAR: comp[0] of size scalar_dim(); VELOCITY: three blocks of size
    /// velocity_component_dim(). Dof index = time_mode * n_space + space_mode.
    std::array<Eigen::VectorXd, 3> comp;

    static PeriodicField scalar(BasesPtr b);
    static PeriodicField velocity(BasesPtr b);
    int rank() const { return kind == Kind::SCALAR ? 1 : 3; }
};

/// Nodal values of a scalar quantity on the space-time grid, flattened as
/// node = it * n_space_nodes + isp.
using Nodal = Eigen::ArrayXd;

// ---- synthesis on the quadrature grid (exact spectral differentiation) ----
Nodal eval_nodes(const PeriodicField& f, int component = 0);
Nodal eval_nodes_dt(const PeriodicField& f, int component = 0);
Nodal eval_nodes_grad(const PeriodicField& f, int axis, int component = 0);
Nodal eval_nodes_lap(const PeriodicField& f); // scalar fields only
Nodal eval_nodes_div(const PeriodicField& f); // velocity fields only

/// scalar field values on boundary face f of the box, flattened it * nq + q
Nodal eval_face_nodes(const PeriodicField& f, int face);

// ---- projections ----
/// L^2 projection of nodal data onto the scalar basis.
PeriodicField project_scalar(BasesPtr bases, const Nodal& values);

// ---- integrals ----
/// integral over S^1 x Omega of a nodal quantity
double integrate_st(const Bases& b, const Nodal& values);
/// integral over Omega at each time node
Eigen::VectorXd integrate_space(const Bases& b, const Nodal& values);
/// integral over S^1 x dOmega of per-face nodal data (6 faces)
double integrate_boundary(const Bases& b, const std::array<Nodal, 6>& face_values);

// ---- pointwise evaluation away from the grid ----
enum class FieldOp { EVAL, GRAD, DIV, TIME_DERIV, BOUNDARY_TRACE };

struct SpaceTimePoint {
    double t;
    std::array<double, 3> x;
};

/// Evaluate the field (or a derivative) at arbitrary points. EVAL/TIME_DERIV
/// return rank() values per point, GRAD returns 3*rank() (gradient of each
/// component), DIV one value (velocity only). BOUNDARY_TRACE is EVAL with the
/// points required to lie on the boundary faces.
std::vector<double> field_calculus(const PeriodicField& f, FieldOp op,
                                   const std::vector<SpaceTimePoint>& points);

// ---- serialization: header + row-major coefficients, little-endian doubles ----
void write_field(std::ostream& os, const PeriodicField& f);
PeriodicField read_field(std::istream& is, BasesPtr bases);

} // namespace nsfp
