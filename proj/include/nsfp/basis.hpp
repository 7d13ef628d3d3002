#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "nsfp/domain.hpp"
#include "nsfp/errors.hpp"

namespace nsfp {

/// Tensor-product trigonometric bases on S^1 x Omega and the quadrature they
/// are evaluated on.
///
/// Scalar (Neumann) basis: cosine tensor modes k in {0..N_x-1}^3 per axis,
/// times the full goniometric time family {1, cos(2 pi j t/L), sin(2 pi j t/L)},
/// j <= N_t. L^2-orthonormal by construction.
///
/// Velocity (Dirichlet) basis: per component, sine tensor modes k in
/// {1..N_x}^3 times the sin/cos pairs (no time constant), orthonormalized
/// against the inner product  (w, w') = int int grad w : grad w'  via a
/// Cholesky factorization of the spatial Gram matrix.
///
/// Quadrature: uniform (periodic trapezoid) nodes in time, 3 N_t + 1 of them,
/// and the uniform midpoint rule with 2 N_x nodes per spatial axis. Both rules
/// integrate exactly every product of basis functions that the assembled
/// identities below require (pairs in every direction, and the cubic/quartic
/// products entering the tested energy identities).
class Bases {
public:
    Bases(const DomainSpec& domain, int N_t, int N_x);

    const DomainSpec& domain() const { return domain_; }
    int N_t() const { return N_t_; }
    int N_x() const { return N_x_; }

    // basis dimensions
    int n_time_scalar() const { return 2 * N_t_ + 1; }
    int n_time_velocity() const { return 2 * N_t_; }
    int n_space_scalar() const { return N_x_ * N_x_ * N_x_; }
    int n_space_velocity() const { return N_x_ * N_x_ * N_x_; }
    int scalar_dim() const { return n_time_scalar() * n_space_scalar(); }
    int velocity_component_dim() const { return n_time_velocity() * n_space_velocity(); }
    int velocity_dim() const { return 3 * velocity_component_dim(); }

    // quadrature
    int n_time_nodes() const { return static_cast<int>(t_nodes_.size()); }
    int n_space_nodes_axis() const { return 2 * N_x_; }
    int n_space_nodes() const { return n_sp_; }
    int n_nodes() const { return n_time_nodes() * n_sp_; }
    const Eigen::VectorXd& time_nodes() const { return t_nodes_; }
    double time_weight() const { return w_t_; }
    const Eigen::VectorXd& space_weights() const { return w_x_; }
    const Eigen::VectorXd& st_weights() const { return w_st_; }
    std::array<double, 3> space_node(int isp) const;
    /// flattened (time, space) node coordinates; index = it * n_space_nodes() + isp
    double volume() const { return domain_.volume(); }

    // space-time evaluation tables, rows = node (it * n_sp + isp), cols = dof
    const Eigen::MatrixXd& st_scalar_val() const { return st_s_val_; }
    const Eigen::MatrixXd& st_scalar_dt() const { return st_s_dt_; }
    const Eigen::MatrixXd& st_scalar_grad(int axis) const { return st_s_g_[axis]; }
    const Eigen::MatrixXd& st_scalar_lap() const { return st_s_lap_; }
    const Eigen::MatrixXd& st_velocity_val() const { return st_v_val_; }
    const Eigen::MatrixXd& st_velocity_dt() const { return st_v_dt_; }
    const Eigen::MatrixXd& st_velocity_grad(int axis) const { return st_v_g_[axis]; }

    // spatial-only tables (per time slice), rows = spatial node
    const Eigen::MatrixXd& x_scalar_val() const { return e_sx_; }
    const Eigen::MatrixXd& x_velocity_val() const { return e_vx_; }
    const Eigen::MatrixXd& x_velocity_grad(int axis) const { return g_vx_[axis]; }

    // time tables, rows = time node
    const Eigen::MatrixXd& t_scalar_val() const { return t_s_val_; }
    const Eigen::MatrixXd& t_velocity_val() const { return t_v_val_; }

    /// boundary face tables; face = 2*axis + side, rows = it * face_nodes + q
    struct Face {
        int axis = 0;
        int side = 0;
        Eigen::MatrixXd st_scalar_val;   ///< (n_t_nodes * n_face_nodes) x scalar_dim
        Eigen::VectorXd weights_x;       ///< spatial face weights, size n_face_nodes
        std::vector<std::array<double, 3>> nodes; ///< spatial coordinates on the face
    };
    const Face& face(int f) const { return faces_[f]; }
    int n_face_nodes() const { return n_face_nodes_; }

    // mode bookkeeping
    std::array<int, 3> scalar_space_mode(int ks) const;
    std::array<int, 3> velocity_space_mode(int ks) const;
    /// time frequency j of scalar time mode kt (0 for the constant)
    int time_mode_freq(int kt) const { return (kt + 1) / 2; }

    /// evaluate one scalar basis dof at an arbitrary (t, x); x may lie on the
    /// closure of Omega. Throws DomainError outside.
    double eval_scalar_dof(int dof, double t, const std::array<double, 3>& x) const;
    double eval_velocity_dof(int dof, double t, const std::array<double, 3>& x) const;
    std::array<double, 3> eval_velocity_dof_grad(int dof, double t,
                                                 const std::array<double, 3>& x) const;
    std::array<double, 3> eval_scalar_dof_grad(int dof, double t,
                                               const std::array<double, 3>& x) const;
    double eval_scalar_dof_dt(int dof, double t, const std::array<double, 3>& x) const;

private:
    DomainSpec domain_;
    int N_t_, N_x_, n_sp_, n_face_nodes_;
    Eigen::VectorXd t_nodes_;
    double w_t_;
    Eigen::VectorXd x_axis_nodes_[3]; // midpoint nodes per axis
    double w_axis_[3];
    Eigen::VectorXd w_x_, w_st_;

    Eigen::MatrixXd t_s_val_, t_s_dt_, t_v_val_, t_v_dt_;
    Eigen::MatrixXd e_sx_, lap_sx_, e_vx_;
    Eigen::MatrixXd g_sx_[3], g_vx_[3];
    Eigen::MatrixXd vel_transform_; // rows: orthonormal modes in terms of raw modes

    Eigen::MatrixXd st_s_val_, st_s_dt_, st_s_lap_;
    Eigen::MatrixXd st_s_g_[3];
    Eigen::MatrixXd st_v_val_, st_v_dt_;
    Eigen::MatrixXd st_v_g_[3];

    std::vector<Face> faces_;

    void check_point(const std::array<double, 3>& x) const;
};

using BasesPtr = std::shared_ptr<const Bases>;

/// Build the bases and quadrature for a domain. Throws ResourceError when the
/// total number of degrees of freedom exceeds the configured cap.
BasesPtr build_bases(const DomainSpec& domain, int N_t, int N_x);

} // namespace nsfp
