#include "nsfp/basis.hpp"

#include <cmath>

namespace nsfp {

namespace {

constexpr int kDofCap = 200000;

// one spatial axis of the cosine family: value and derivatives of mode k
struct AxisFn {
    double val, d1, d2;
};

AxisFn cos_mode(int k, double x, double len) {
    const double norm = k == 0 ? std::sqrt(1.0 / len) : std::sqrt(2.0 / len);
    const double w = k * M_PI / len;
    return {norm * std::cos(w * x), -norm * w * std::sin(w * x),
            -norm * w * w * std::cos(w * x)};
}

AxisFn sin_mode(int k, double x, double len) {
    const double norm = std::sqrt(2.0 / len);
    const double w = k * M_PI / len;
    return {norm * std::sin(w * x), norm * w * std::cos(w * x),
            -norm * w * w * std::sin(w * x)};
}

// goniometric time family: mode 0 constant, then cos/sin pairs
void time_mode(int kt, double t, double period, double& val, double& dt) {
    if (kt == 0) {
        val = std::sqrt(1.0 / period);
        dt = 0.0;
        return;
    }
    const int j = (kt + 1) / 2;
    const double w = 2.0 * M_PI * j / period;
    const double norm = std::sqrt(2.0 / period);
    if (kt % 2 == 1) {
        val = norm * std::cos(w * t);
        dt = -norm * w * std::sin(w * t);
    } else {
        val = norm * std::sin(w * t);
        dt = norm * w * std::cos(w * t);
    }
}

} // namespace

Bases::Bases(const DomainSpec& domain, int N_t, int N_x)
    : domain_(domain), N_t_(N_t), N_x_(N_x) {
    domain_.validate();
    if (N_t < 1 || N_x < 1) throw ParameterError("build_bases: N_t, N_x must be >= 1");
    if (scalar_dim() + velocity_dim() > kDofCap)
        throw ResourceError("build_bases: mode count exceeds cap");

    const int m_t = 3 * N_t + 1;
    const int m_x = 2 * N_x;
    n_sp_ = m_x * m_x * m_x;
    n_face_nodes_ = m_x * m_x;

    // quadrature nodes: uniform periodic in time, midpoint per axis in space
    t_nodes_.resize(m_t);
    for (int j = 0; j < m_t; ++j) t_nodes_[j] = domain_.period_L * j / m_t;
    w_t_ = domain_.period_L / m_t;
    for (int a = 0; a < 3; ++a) {
        x_axis_nodes_[a].resize(m_x);
        for (int i = 0; i < m_x; ++i)
            x_axis_nodes_[a][i] = domain_.box[a] * (i + 0.5) / m_x;
        w_axis_[a] = domain_.box[a] / m_x;
    }
    w_x_.resize(n_sp_);
    for (int iz = 0; iz < m_x; ++iz)
        for (int iy = 0; iy < m_x; ++iy)
            for (int ix = 0; ix < m_x; ++ix)
                w_x_[ix + m_x * (iy + m_x * iz)] = w_axis_[0] * w_axis_[1] * w_axis_[2];
    w_st_.resize(m_t * n_sp_);
    for (int it = 0; it < m_t; ++it)
        w_st_.segment(static_cast<Eigen::Index>(it) * n_sp_, n_sp_) = w_t_ * w_x_;

    // time tables
    const int n_ts = n_time_scalar();
    t_s_val_.resize(m_t, n_ts);
    t_s_dt_.resize(m_t, n_ts);
    for (int it = 0; it < m_t; ++it)
        for (int kt = 0; kt < n_ts; ++kt)
            time_mode(kt, t_nodes_[it], domain_.period_L, t_s_val_(it, kt), t_s_dt_(it, kt));
    t_v_val_ = t_s_val_.rightCols(n_time_velocity());
    t_v_dt_ = t_s_dt_.rightCols(n_time_velocity());

    // per-axis mode value tables at the axis nodes
    const int n_ss = n_space_scalar();
    const int n_sv = n_space_velocity();
    e_sx_.resize(n_sp_, n_ss);
    lap_sx_.resize(n_sp_, n_ss);
    for (int a = 0; a < 3; ++a) g_sx_[a].resize(n_sp_, n_ss);
    e_vx_.resize(n_sp_, n_sv);
    for (int a = 0; a < 3; ++a) g_vx_[a].resize(n_sp_, n_sv);

    for (int iz = 0; iz < m_x; ++iz) {
        for (int iy = 0; iy < m_x; ++iy) {
            for (int ix = 0; ix < m_x; ++ix) {
                const int isp = ix + m_x * (iy + m_x * iz);
                const int idx[3] = {ix, iy, iz};
                for (int ks = 0; ks < n_ss; ++ks) {
                    const auto k = scalar_space_mode(ks);
                    AxisFn f[3];
                    for (int a = 0; a < 3; ++a)
                        f[a] = cos_mode(k[a], x_axis_nodes_[a][idx[a]], domain_.box[a]);
                    e_sx_(isp, ks) = f[0].val * f[1].val * f[2].val;
                    g_sx_[0](isp, ks) = f[0].d1 * f[1].val * f[2].val;
                    g_sx_[1](isp, ks) = f[0].val * f[1].d1 * f[2].val;
                    g_sx_[2](isp, ks) = f[0].val * f[1].val * f[2].d1;
                    lap_sx_(isp, ks) = f[0].d2 * f[1].val * f[2].val +
                                       f[0].val * f[1].d2 * f[2].val +
                                       f[0].val * f[1].val * f[2].d2;
                }
                for (int ks = 0; ks < n_sv; ++ks) {
                    const auto k = velocity_space_mode(ks);
                    AxisFn f[3];
                    for (int a = 0; a < 3; ++a)
                        f[a] = sin_mode(k[a], x_axis_nodes_[a][idx[a]], domain_.box[a]);
                    e_vx_(isp, ks) = f[0].val * f[1].val * f[2].val;
                    g_vx_[0](isp, ks) = f[0].d1 * f[1].val * f[2].val;
                    g_vx_[1](isp, ks) = f[0].val * f[1].d1 * f[2].val;
                    g_vx_[2](isp, ks) = f[0].val * f[1].val * f[2].d1;
                }
            }
        }
    }

    // orthonormalize the velocity spatial modes under the H^1_0 product
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n_sv, n_sv);
    for (int a = 0; a < 3; ++a)
        gram.noalias() += g_vx_[a].transpose() * w_x_.asDiagonal() * g_vx_[a];
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw SolverError("build_bases: velocity Gram not positive definite");
    // orthonormal modes: b_hat_i = sum_j (L^-1)_{ij} b_j
    vel_transform_ = Eigen::MatrixXd::Identity(n_sv, n_sv);
    llt.matrixL().solveInPlace(vel_transform_);
    e_vx_ = (vel_transform_ * e_vx_.transpose()).transpose();
    for (int a = 0; a < 3; ++a)
        g_vx_[a] = (vel_transform_ * g_vx_[a].transpose()).transpose();

    // space-time tables via the tensor structure
    auto kron = [&](const Eigen::MatrixXd& t_tab, const Eigen::MatrixXd& x_tab) {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(m_t) * x_tab.rows(),
                            t_tab.cols() * x_tab.cols());
        for (int it = 0; it < m_t; ++it)
            for (int kt = 0; kt < t_tab.cols(); ++kt)
                out.block(static_cast<Eigen::Index>(it) * x_tab.rows(),
                          static_cast<Eigen::Index>(kt) * x_tab.cols(), x_tab.rows(),
                          x_tab.cols()) = t_tab(it, kt) * x_tab;
        return out;
    };
    st_s_val_ = kron(t_s_val_, e_sx_);
    st_s_dt_ = kron(t_s_dt_, e_sx_);
    st_s_lap_ = kron(t_s_val_, lap_sx_);
    for (int a = 0; a < 3; ++a) st_s_g_[a] = kron(t_s_val_, g_sx_[a]);
    st_v_val_ = kron(t_v_val_, e_vx_);
    st_v_dt_ = kron(t_v_dt_, e_vx_);
    for (int a = 0; a < 3; ++a) st_v_g_[a] = kron(t_v_val_, g_vx_[a]);

    // boundary faces
    faces_.resize(6);
    for (int f = 0; f < 6; ++f) {
        Face& face = faces_[f];
        face.axis = f / 2;
        face.side = f % 2;
        const int t1 = face.axis == 0 ? 1 : 0;
        const int t2 = face.axis == 2 ? 1 : 2;
        face.nodes.resize(n_face_nodes_);
        face.weights_x.resize(n_face_nodes_);
        Eigen::MatrixXd e_face(n_face_nodes_, n_ss);
        for (int i2 = 0; i2 < m_x; ++i2) {
            for (int i1 = 0; i1 < m_x; ++i1) {
                const int q = i1 + m_x * i2;
                std::array<double, 3> x{};
                x[face.axis] = face.side ? domain_.box[face.axis] : 0.0;
                x[t1] = x_axis_nodes_[t1][i1];
                x[t2] = x_axis_nodes_[t2][i2];
                face.nodes[q] = x;
                face.weights_x[q] = w_axis_[t1] * w_axis_[t2];
                for (int ks = 0; ks < n_ss; ++ks) {
                    const auto k = scalar_space_mode(ks);
                    double v = 1.0;
                    for (int a = 0; a < 3; ++a)
                        v *= cos_mode(k[a], x[a], domain_.box[a]).val;
                    e_face(q, ks) = v;
                }
            }
        }
        face.st_scalar_val = kron(t_s_val_, e_face);
    }
}

std::array<double, 3> Bases::space_node(int isp) const {
    const int m_x = 2 * N_x_;
    const int ix = isp % m_x;
    const int iy = (isp / m_x) % m_x;
    const int iz = isp / (m_x * m_x);
    return {x_axis_nodes_[0][ix], x_axis_nodes_[1][iy], x_axis_nodes_[2][iz]};
}

std::array<int, 3> Bases::scalar_space_mode(int ks) const {
    return {ks % N_x_, (ks / N_x_) % N_x_, ks / (N_x_ * N_x_)};
}

std::array<int, 3> Bases::velocity_space_mode(int ks) const {
    return {ks % N_x_ + 1, (ks / N_x_) % N_x_ + 1, ks / (N_x_ * N_x_) + 1};
}

void Bases::check_point(const std::array<double, 3>& x) const {
    for (int a = 0; a < 3; ++a) {
        const double tol = 1e-12 * domain_.box[a];
        if (x[a] < -tol || x[a] > domain_.box[a] + tol)
            throw DomainError("evaluation point outside the closure of Omega");
    }
}

double Bases::eval_scalar_dof(int dof, double t, const std::array<double, 3>& x) const {
    check_point(x);
    const int kt = dof / n_space_scalar();
    const int ks = dof % n_space_scalar();
    double tv, td;
    time_mode(kt, t, domain_.period_L, tv, td);
    const auto k = scalar_space_mode(ks);
    double v = tv;
    for (int a = 0; a < 3; ++a) v *= cos_mode(k[a], x[a], domain_.box[a]).val;
    return v;
}

std::array<double, 3> Bases::eval_scalar_dof_grad(int dof, double t,
                                                  const std::array<double, 3>& x) const {
    check_point(x);
    const int kt = dof / n_space_scalar();
    const int ks = dof % n_space_scalar();
    double tv, td;
    time_mode(kt, t, domain_.period_L, tv, td);
    const auto k = scalar_space_mode(ks);
    AxisFn f[3];
    for (int a = 0; a < 3; ++a) f[a] = cos_mode(k[a], x[a], domain_.box[a]);
    return {tv * f[0].d1 * f[1].val * f[2].val, tv * f[0].val * f[1].d1 * f[2].val,
            tv * f[0].val * f[1].val * f[2].d1};
}

double Bases::eval_scalar_dof_dt(int dof, double t, const std::array<double, 3>& x) const {
    check_point(x);
    const int kt = dof / n_space_scalar();
    const int ks = dof % n_space_scalar();
    double tv, td;
    time_mode(kt, t, domain_.period_L, tv, td);
    const auto k = scalar_space_mode(ks);
    double v = td;
    for (int a = 0; a < 3; ++a) v *= cos_mode(k[a], x[a], domain_.box[a]).val;
    return v;
}

double Bases::eval_velocity_dof(int dof, double t, const std::array<double, 3>& x) const {
    check_point(x);
    const int n_sv = n_space_velocity();
    const int kt = dof / n_sv;
    const int ks = dof % n_sv;
    double tv, td;
    time_mode(kt + 1, t, domain_.period_L, tv, td); // velocity modes skip the constant
    // orthonormalized mode: combination of raw sine modes
    double v = 0.0;
    for (int j = 0; j < n_sv; ++j) {
        const double w = vel_transform_(ks, j);
        if (w == 0.0) continue;
        const auto k = velocity_space_mode(j);
        double b = 1.0;
        for (int a = 0; a < 3; ++a) b *= sin_mode(k[a], x[a], domain_.box[a]).val;
        v += w * b;
    }
    return tv * v;
}

std::array<double, 3> Bases::eval_velocity_dof_grad(int dof, double t,
                                                    const std::array<double, 3>& x) const {
    check_point(x);
    const int n_sv = n_space_velocity();
    const int kt = dof / n_sv;
    const int ks = dof % n_sv;
    double tv, td;
    time_mode(kt + 1, t, domain_.period_L, tv, td);
    std::array<double, 3> g{0.0, 0.0, 0.0};
    for (int j = 0; j < n_sv; ++j) {
        const double w = vel_transform_(ks, j);
        if (w == 0.0) continue;
        const auto k = velocity_space_mode(j);
        AxisFn f[3];
        for (int a = 0; a < 3; ++a) f[a] = sin_mode(k[a], x[a], domain_.box[a]);
        g[0] += w * f[0].d1 * f[1].val * f[2].val;
        g[1] += w * f[0].val * f[1].d1 * f[2].val;
        g[2] += w * f[0].val * f[1].val * f[2].d1;
    }
    for (auto& v : g) v *= tv;
    return g;
}

BasesPtr build_bases(const DomainSpec& domain, int N_t, int N_x) {
    return std::make_shared<const Bases>(domain, N_t, N_x);
}

} // namespace nsfp
