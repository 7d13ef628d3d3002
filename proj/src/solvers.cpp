#include "nsfp/solvers.hpp"

#include <cmath>

namespace nsfp {

void ApproxParams::validate(const ConstitutiveParams& cp) const {
    if (N_t < 1 || N_x < 1) throw ParameterError("approx: N_t, N_x must be >= 1");
    if (!(tau >= 0.0)) throw ParameterError("approx: tau must be >= 0");
    if (!(zeta > 0.0)) throw ParameterError("approx: zeta must be > 0");
    if (!(eps > 0.0)) throw ParameterError("approx: eps must be > 0");
    if (!(delta > 0.0)) throw ParameterError("approx: delta must be > 0");
    if (!(Gamma >= 2.0 * cp.gamma))
        throw ParameterError("approx: Gamma must be >= 2*gamma");
    if (!(eps <= delta * delta))
        throw ParameterError("approx: eps must be <= delta^2 (eps << delta)");
    if (!(B_exp >= 2.0)) throw ParameterError("approx: B must be >= 2");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw ParameterError("approx: lambda must be in [0, 1]");
}

ApproxParams ApproxParams::defaults_for(const ConstitutiveParams& cp) {
    ApproxParams p;
    p.Gamma = std::max(2.0 * cp.gamma, 4.0);
    p.zeta = p.delta;
    p.eps = p.delta * p.delta;
    return p;
}

Nodal theta_nodes(const PeriodicField& ln_theta) {
    return eval_nodes(ln_theta).exp();
}

std::array<Nodal, 3> force_nodes(const Bases& b, const DomainSpec& domain) {
    std::array<Nodal, 3> f;
    const int nsp = b.n_space_nodes();
    for (auto& c : f) c.setZero(b.n_nodes());
    if (domain.force.kind == ForcingSpec::Kind::ZERO || domain.force.amplitude == 0.0)
        return f;
    for (int it = 0; it < b.n_time_nodes(); ++it)
        for (int isp = 0; isp < nsp; ++isp) {
            const auto v = domain.force(b.time_nodes()[it], b.space_node(isp),
                                        domain.period_L, domain.box);
            for (int c = 0; c < 3; ++c)
                f[c][static_cast<Eigen::Index>(it) * nsp + isp] = v[c];
        }
    return f;
}

namespace {

struct VelocityNodes {
    std::array<Nodal, 3> val, dt;
    Nodal grad[3][3]; // grad[a][c] = d_a u_c
    Nodal div;
};

VelocityNodes velocity_nodes(const PeriodicField& u) {
    VelocityNodes v;
    for (int c = 0; c < 3; ++c) {
        v.val[c] = eval_nodes(u, c);
        v.dt[c] = eval_nodes_dt(u, c);
        for (int a = 0; a < 3; ++a) v.grad[a][c] = eval_nodes_grad(u, a, c);
    }
    v.div = v.grad[0][0] + v.grad[1][1] + v.grad[2][2];
    return v;
}

Eigen::VectorXd pair_against(const Eigen::MatrixXd& test, const Eigen::VectorXd& w,
                             const Nodal& values) {
    return test.transpose() * (w.array() * values).matrix();
}

Nodal total_pressure(const Nodal& rho, const Nodal& theta, const Problem& pb) {
    const double g = pb.constitutive.gamma;
    Nodal p(rho.size());
    for (Eigen::Index i = 0; i < rho.size(); ++i)
        p[i] = pow_signed(rho[i], g) + rho[i] * theta[i] +
               pb.constitutive.a_rad / 3.0 * std::pow(theta[i], 4) +
               pb.approx.delta * (pow_signed(rho[i], pb.approx.Gamma) + rho[i] * rho[i]);
    return p;
}

double rel_residual(const Eigen::VectorXd& r, const Eigen::VectorXd& b) {
    return r.norm() / (1.0 + b.norm());
}

struct LinearSystem {
    Eigen::MatrixXd mat;
    Eigen::VectorXd rhs;
};

LinearSystem assemble_momentum(const PeriodicField& rho, const PeriodicField& u_tilde,
                               const PeriodicField& ln_theta_tilde, const Problem& problem,
                               double lambda) {
    const Bases& b = *u_tilde.bases;
    const int nvc = b.velocity_component_dim();
    const Eigen::VectorXd& w = b.st_weights();
    const double zeta = problem.approx.zeta;
    const double eps = problem.approx.eps;
    const double m = problem.domain.mean_density();

    const Nodal rho_n = eval_nodes(rho);
    const Nodal rho_dt = eval_nodes_dt(rho);
    Nodal rho_g[3];
    for (int a = 0; a < 3; ++a) rho_g[a] = eval_nodes_grad(rho, a);
    const Nodal theta = theta_nodes(ln_theta_tilde);
    const VelocityNodes un = velocity_nodes(u_tilde);
    const auto f = force_nodes(b, problem.domain);

    const Nodal mu = problem.constitutive.mu0 * (1.0 + theta);
    const Nodal eta_m23mu = problem.constitutive.eta0 * (1.0 + theta) - (2.0 / 3.0) * mu;

    LinearSystem sys;
    sys.mat.setZero(3 * nvc, 3 * nvc);
    const Eigen::MatrixXd t_pair =
        b.st_velocity_val().transpose() * w.asDiagonal() * b.st_velocity_dt();
    Eigen::MatrixXd common = Eigen::MatrixXd::Zero(nvc, nvc);
    for (int a = 0; a < 3; ++a)
        common.noalias() += b.st_velocity_grad(a).transpose() *
                            (w.array() * mu).matrix().asDiagonal() * b.st_velocity_grad(a);
    for (int c = 0; c < 3; ++c) {
        sys.mat.block(c * nvc, c * nvc, nvc, nvc) = zeta * t_pair + common;
        for (int cc = 0; cc < 3; ++cc) {
            sys.mat.block(c * nvc, cc * nvc, nvc, nvc).noalias() +=
                b.st_velocity_grad(cc).transpose() *
                (w.array() * mu).matrix().asDiagonal() * b.st_velocity_grad(c);
            sys.mat.block(c * nvc, cc * nvc, nvc, nvc).noalias() +=
                b.st_velocity_grad(c).transpose() *
                (w.array() * eta_m23mu).matrix().asDiagonal() * b.st_velocity_grad(cc);
        }
    }

    const Nodal p_tot = total_pressure(rho_n, theta, problem);
    sys.rhs.resize(3 * nvc);
    for (int c = 0; c < 3; ++c) {
        Nodal val_part = -(rho_dt * un.val[c] + rho_n * un.dt[c]); // -d_t(rho u)_c
        for (int a = 0; a < 3; ++a) val_part -= eps * rho_g[a] * un.grad[a][c];
        val_part += 0.5 * eps * (m - rho_n) * un.val[c];
        val_part += rho_n * f[c];
        Eigen::VectorXd bc = pair_against(b.st_velocity_val(), w, val_part);
        for (int a = 0; a < 3; ++a)
            bc += pair_against(b.st_velocity_grad(a), w, rho_n * un.val[a] * un.val[c]);
        bc += pair_against(b.st_velocity_grad(c), w, p_tot);
        sys.rhs.segment(c * nvc, nvc) = lambda * bc;
    }
    return sys;
}

Eigen::VectorXd velocity_coefficients(const PeriodicField& u) {
    const int nvc = u.bases->velocity_component_dim();
    Eigen::VectorXd v(3 * nvc);
    for (int c = 0; c < 3; ++c) v.segment(c * nvc, nvc) = u.comp[c];
    return v;
}

// SPD (tau > 0) linear operator of the Kirchhoff heat solve
struct ZOperator {
    Eigen::MatrixXd mat;
    Eigen::LLT<Eigen::MatrixXd> llt;
    std::vector<int> pinned; // tau = 0: spatial null modes pinned to zero

    ZOperator(const Bases& b, double tau) {
        const Eigen::VectorXd& w = b.st_weights();
        mat = b.st_scalar_grad(0).transpose() * w.asDiagonal() * b.st_scalar_grad(0);
        for (int a = 1; a < 3; ++a)
            mat.noalias() +=
                b.st_scalar_grad(a).transpose() * w.asDiagonal() * b.st_scalar_grad(a);
        if (tau > 0.0) {
            mat.noalias() +=
                tau * (b.st_scalar_dt().transpose() * w.asDiagonal() * b.st_scalar_dt());
            mat.noalias() +=
                tau * (b.st_scalar_val().transpose() * w.asDiagonal() * b.st_scalar_val());
        } else {
            // pure spatial stiffness: pin the spatially constant mode of every
            // time mode; the dropped data is the compatibility defect
            for (int kt = 0; kt < b.n_time_scalar(); ++kt)
                pinned.push_back(kt * b.n_space_scalar());
            for (int dof : pinned) {
                mat.row(dof).setZero();
                mat.col(dof).setZero();
                mat(dof, dof) = 1.0;
            }
        }
        llt.compute(mat);
        if (llt.info() != Eigen::Success)
            throw SolverError("solve_temperature: operator not positive definite");
    }

    Eigen::VectorXd solve(Eigen::VectorXd rhs, double* compat) const {
        double c = 0.0;
        for (int dof : pinned) {
            c += rhs[dof] * rhs[dof];
            rhs[dof] = 0.0;
        }
        if (compat) *compat = std::sqrt(c);
        return llt.solve(rhs);
    }
};

// lagged (rho, u) data entering the heat solve
struct HeatData {
    const Bases* bases;
    Nodal rho;
    Nodal eps_delta_term; // eps delta (Gamma rho^{Gamma-2} + 2) |grad rho|^2
    std::array<Nodal, 3> u;
    Nodal div_u;
    Nodal q_mu, q_eta; // S(theta,.) : grad u = mu0(1+theta) q_mu + eta0(1+theta) q_eta
    Eigen::VectorXd face_w[6];
};

HeatData build_heat_data(const PeriodicField& rho, const PeriodicField& u_tilde,
                         const Problem& problem) {
    const Bases& b = *rho.bases;
    HeatData h;
    h.bases = &b;
    h.rho = eval_nodes(rho);
    const VelocityNodes un = velocity_nodes(u_tilde);
    h.u = un.val;
    h.div_u = un.div;
    h.q_mu = Nodal::Zero(b.n_nodes());
    for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c)
            h.q_mu += 0.5 * (un.grad[a][c] + un.grad[c][a]).square();
    h.q_mu -= (2.0 / 3.0) * un.div.square();
    h.q_eta = un.div.square();

    Nodal grad_rho_sq = Nodal::Zero(b.n_nodes());
    for (int a = 0; a < 3; ++a) grad_rho_sq += eval_nodes_grad(rho, a).square();
    const double eps = problem.approx.eps;
    const double delta = problem.approx.delta;
    const double big_g = problem.approx.Gamma;
    h.eps_delta_term.resize(b.n_nodes());
    for (Eigen::Index i = 0; i < h.rho.size(); ++i)
        h.eps_delta_term[i] =
            eps * delta * (big_g * pow_signed(h.rho[i], big_g - 2.0) + 2.0) *
            grad_rho_sq[i];

    for (int f = 0; f < 6; ++f) {
        const auto& face = b.face(f);
        h.face_w[f].resize(static_cast<Eigen::Index>(b.n_time_nodes()) * b.n_face_nodes());
        for (int it = 0; it < b.n_time_nodes(); ++it)
            h.face_w[f].segment(static_cast<Eigen::Index>(it) * b.n_face_nodes(),
                                b.n_face_nodes()) = b.time_weight() * face.weights_x;
    }
    return h;
}

// source pairings of the heat equation for a given interior/face temperature
Eigen::VectorXd heat_source_pairings(const HeatData& h,
                                     const Nodal& theta,
                                     const std::array<Nodal, 6>& theta_face,
                                     const Problem& problem) {
    const Bases& b = *h.bases;
    const Eigen::VectorXd& w = b.st_weights();
    const double zeta = problem.approx.zeta;
    const double gamma = problem.constitutive.gamma;
    const double c_v = problem.constitutive.c_v;
    const double a_rad = problem.constitutive.a_rad;

    Nodal rho_e(h.rho.size()), p(h.rho.size());
    for (Eigen::Index i = 0; i < h.rho.size(); ++i) {
        const double th4 = std::pow(theta[i], 4);
        const double rho_g = pow_signed(h.rho[i], gamma);
        rho_e[i] = rho_g / (gamma - 1.0) + c_v * h.rho[i] * theta[i] + a_rad * th4;
        p[i] = rho_g + h.rho[i] * theta[i] + a_rad / 3.0 * th4;
    }
    const Nodal s_gu = problem.constitutive.mu0 * (1.0 + theta) * h.q_mu +
                       problem.constitutive.eta0 * (1.0 + theta) * h.q_eta;

    Eigen::VectorXd rhs =
        pair_against(b.st_scalar_dt(), w, zeta * theta + rho_e); // time-IBP'd transport
    for (int a = 0; a < 3; ++a)
        rhs += pair_against(b.st_scalar_grad(a), w, rho_e * h.u[a]);
    rhs += pair_against(b.st_scalar_val(), w,
                        s_gu - p * h.div_u + h.eps_delta_term);

    const double theta0 = problem.domain.theta0;
    for (int f = 0; f < 6; ++f) {
        const auto& face = b.face(f);
        Nodal g(theta_face[f].size());
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            const double d = transport_eval(theta_face[f][i], problem.constitutive).d;
            g[i] = d * (theta0 - theta_face[f][i]);
        }
        rhs += face.st_scalar_val.transpose() * (h.face_w[f].array() * g).matrix();
    }
    return rhs;
}

std::array<Nodal, 6> face_theta_from_field(const PeriodicField& ln_theta) {
    std::array<Nodal, 6> out;
    for (int f = 0; f < 6; ++f)
        out[f] = (ln_theta.bases->face(f).st_scalar_val * ln_theta.comp[0]).array().exp();
    return out;
}

} // namespace

Nodal continuity_residual_nodes(const PeriodicField& rho, const PeriodicField& u,
                                const Problem& problem) {
    const double eps = problem.approx.eps;
    const double m = problem.domain.mean_density();
    const Nodal r = eval_nodes(rho);
    Nodal res = eval_nodes_dt(rho) - eps * eval_nodes_lap(rho) + eps * r - eps * m;
    for (int a = 0; a < 3; ++a)
        res += eval_nodes_grad(rho, a) * eval_nodes(u, a);
    res += r * eval_nodes_div(u);
    return res;
}

PeriodicField solve_continuity(const PeriodicField& u_tilde, const Problem& problem,
                               const Nodal* extra_source) {
    const BasesPtr bases = u_tilde.bases;
    const Bases& b = *bases;
    const double eps = problem.approx.eps;
    const double m = problem.domain.mean_density();
    const Eigen::VectorXd& w = b.st_weights();

    const VelocityNodes un = velocity_nodes(u_tilde);

    // strong-form trial operator d_t + div(. u) - eps lap + eps
    Eigen::MatrixXd op = b.st_scalar_dt() - eps * b.st_scalar_lap() + eps * b.st_scalar_val();
    for (int a = 0; a < 3; ++a)
        op += (b.st_scalar_grad(a).array().colwise() * un.val[a]).matrix();
    op += (b.st_scalar_val().array().colwise() * un.div).matrix();

    const Eigen::MatrixXd A = b.st_scalar_val().transpose() * w.asDiagonal() * op;
    Nodal source = Nodal::Constant(b.n_nodes(), eps * m);
    if (extra_source) source += *extra_source;
    const Eigen::VectorXd rhs = pair_against(b.st_scalar_val(), w, source);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (rel_residual(A * sol - rhs, rhs) > 1e-10)
        throw SolverError("solve_continuity: linear solve did not reach tolerance");

    PeriodicField rho = PeriodicField::scalar(bases);
    rho.comp[0] = sol;
    return rho;
}

PeriodicField solve_momentum(const PeriodicField& rho, const PeriodicField& u_tilde,
                             const PeriodicField& ln_theta_tilde, const Problem& problem,
                             double lambda) {
    const LinearSystem sys = assemble_momentum(rho, u_tilde, ln_theta_tilde, problem, lambda);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.mat);
    const Eigen::VectorXd sol = lu.solve(sys.rhs);
    if (rel_residual(sys.mat * sol - sys.rhs, sys.rhs) > 1e-10)
        throw SolverError("solve_momentum: linear solve did not reach tolerance");
    PeriodicField u = PeriodicField::velocity(u_tilde.bases);
    const int nvc = u_tilde.bases->velocity_component_dim();
    for (int c = 0; c < 3; ++c) u.comp[c] = sol.segment(c * nvc, nvc);
    return u;
}

TemperatureSolve solve_temperature(const PeriodicField& rho, const PeriodicField& u_tilde,
                                   const PeriodicField& ln_theta_tilde,
                                   const Problem& problem, double lambda,
                                   const Nodal* extra_source) {
    const BasesPtr bases = rho.bases;
    const Bases& b = *bases;

    const ZOperator op(b, problem.approx.tau);
    const HeatData h = build_heat_data(rho, u_tilde, problem);
    Eigen::VectorXd rhs =
        lambda * heat_source_pairings(h, theta_nodes(ln_theta_tilde),
                                      face_theta_from_field(ln_theta_tilde), problem);
    if (extra_source)
        rhs += pair_against(b.st_scalar_val(), b.st_weights(), *extra_source);

    TemperatureSolve out{PeriodicField::scalar(bases), PeriodicField::scalar(bases), 0.0};
    out.z.comp[0] = op.solve(rhs, &out.pinned_compat);

    const KirchhoffSpec ks = problem.approx.kirchhoff(problem.constitutive);
    const Nodal z_nodes = eval_nodes(out.z);
    Nodal ln_theta_nodes(z_nodes.size());
    for (Eigen::Index i = 0; i < z_nodes.size(); ++i)
        ln_theta_nodes[i] = phi_inverse(z_nodes[i], ks);
    out.ln_theta = project_scalar(bases, ln_theta_nodes);
    return out;
}

TemperatureSolve solve_temperature_coupled(const PeriodicField& rho,
                                           const PeriodicField& u_tilde,
                                           const PeriodicField& ln_theta_guess,
                                           const Problem& problem, double lambda) {
    const BasesPtr bases = rho.bases;
    const Bases& b = *bases;
    const KirchhoffSpec ks = problem.approx.kirchhoff(problem.constitutive);
    const ZOperator op(b, problem.approx.tau);
    const HeatData h = build_heat_data(rho, u_tilde, problem);
    const Eigen::VectorXd& w = b.st_weights();
    const double c_v = problem.constitutive.c_v;
    const double a_rad = problem.constitutive.a_rad;
    const double mu0 = problem.constitutive.mu0;
    const double eta0 = problem.constitutive.eta0;
    const double theta0 = problem.domain.theta0;
    const double zeta = problem.approx.zeta;

    // start from the Kirchhoff image of the guess
    Eigen::VectorXd z = [&] {
        const Nodal ln_t = eval_nodes(ln_theta_guess);
        Nodal z0(ln_t.size());
        for (Eigen::Index i = 0; i < ln_t.size(); ++i)
            z0[i] = phi_eval(ln_t[i], ks).value;
        return project_scalar(bases, z0).comp[0];
    }();

    auto theta_of = [&](const Eigen::VectorXd& zc, Nodal& ln_theta_out) {
        PeriodicField zf = PeriodicField::scalar(bases);
        zf.comp[0] = zc;
        const Nodal z_n = eval_nodes(zf);
        ln_theta_out.resize(z_n.size());
        Nodal th(z_n.size());
        for (Eigen::Index i = 0; i < z_n.size(); ++i) {
            ln_theta_out[i] = phi_inverse(z_n[i], ks);
            th[i] = std::exp(ln_theta_out[i]);
        }
        return th;
    };
    auto face_theta_of = [&](const Eigen::VectorXd& zc) {
        std::array<Nodal, 6> out;
        for (int f = 0; f < 6; ++f) {
            const Nodal zf = (b.face(f).st_scalar_val * zc).array();
            out[f].resize(zf.size());
            for (Eigen::Index i = 0; i < zf.size(); ++i)
                out[f][i] = std::exp(phi_inverse(zf[i], ks));
        }
        return out;
    };
    auto residual = [&](const Eigen::VectorXd& zc, const Nodal& theta,
                        const std::array<Nodal, 6>& tface) {
        return Eigen::VectorXd(op.mat * zc -
                               lambda * heat_source_pairings(h, theta, tface, problem));
    };

    Nodal ln_theta_nodes;
    Nodal theta = theta_of(z, ln_theta_nodes);
    std::array<Nodal, 6> tface = face_theta_of(z);
    Eigen::VectorXd f_vec = residual(z, theta, tface);
    double f_norm = f_vec.norm();

    bool done = false;
    for (int it = 0; it < 50 && !done; ++it) {
        // Jacobian: linear part minus the temperature sensitivities,
        // d theta / d z = theta / Phi'(ln theta)
        Nodal sens(theta.size());
        for (Eigen::Index i = 0; i < theta.size(); ++i)
            sens[i] = theta[i] / phi_eval(ln_theta_nodes[i], ks).derivative;

        Eigen::MatrixXd jac = op.mat;
        const Nodal de_dth = (zeta + c_v * h.rho + 4.0 * a_rad * theta.pow(3)) * sens;
        jac.noalias() -= lambda * (b.st_scalar_dt().transpose() *
                                   (w.array() * de_dth).matrix().asDiagonal() *
                                   b.st_scalar_val());
        const Nodal de_conv = (c_v * h.rho + 4.0 * a_rad * theta.pow(3)) * sens;
        for (int a = 0; a < 3; ++a)
            jac.noalias() -= lambda * (b.st_scalar_grad(a).transpose() *
                                       (w.array() * (de_conv * h.u[a])).matrix().asDiagonal() *
                                       b.st_scalar_val());
        const Nodal dsrc = (mu0 * h.q_mu + eta0 * h.q_eta -
                            (h.rho + 4.0 / 3.0 * a_rad * theta.pow(3)) * h.div_u) *
                           sens;
        jac.noalias() -= lambda * (b.st_scalar_val().transpose() *
                                   (w.array() * dsrc).matrix().asDiagonal() *
                                   b.st_scalar_val());
        for (int f = 0; f < 6; ++f) {
            const auto& face = b.face(f);
            Nodal dflux(tface[f].size());
            for (Eigen::Index i = 0; i < dflux.size(); ++i) {
                const double th = tface[f][i];
                const double d = transport_eval(th, problem.constitutive).d;
                const double dprime =
                    problem.constitutive.d_variant == DVariant::TEMP_DEPENDENT
                        ? 4.5 * problem.constitutive.d0 * th * th
                        : 0.0;
                const double s = th / phi_eval(std::log(th), ks).derivative;
                dflux[i] = (dprime * (theta0 - th) - d) * s;
            }
            jac.noalias() -= lambda * (face.st_scalar_val.transpose() *
                                       (h.face_w[f].array() * dflux).matrix().asDiagonal() *
                                       face.st_scalar_val);
        }
        for (int dof : op.pinned) {
            jac.row(dof).setZero();
            jac.col(dof).setZero();
            jac(dof, dof) = 1.0;
            f_vec[dof] = 0.0;
        }

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
        const Eigen::VectorXd step = lu.solve(-f_vec);
        if (!step.allFinite())
            throw SolverError("solve_temperature_coupled: non-finite Newton step");

        // damped step: accept the first candidate that reduces the residual
        double alpha = 1.0;
        for (int back = 0; back < 8; ++back) {
            const Eigen::VectorXd z_try = z + alpha * step;
            Nodal ln_try;
            const Nodal th_try = theta_of(z_try, ln_try);
            const auto tface_try = face_theta_of(z_try);
            Eigen::VectorXd f_try = residual(z_try, th_try, tface_try);
            for (int dof : op.pinned) f_try[dof] = 0.0;
            if (f_try.norm() <= (1.0 - 1e-4 * alpha) * f_norm || back == 7) {
                z = z_try;
                theta = th_try;
                ln_theta_nodes = ln_try;
                tface = tface_try;
                f_vec = f_try;
                f_norm = f_try.norm();
                break;
            }
            alpha *= 0.5;
        }
        const double step_rel = (alpha * step).norm() / (1.0 + z.norm());
        if (step_rel <= 1e-13 || f_norm <= 1e-14 * (1.0 + z.norm())) done = true;
    }
    if (!done && f_norm > 1e-9 * (1.0 + z.norm()))
        throw SolverError("solve_temperature_coupled: Newton did not converge");

    TemperatureSolve out{PeriodicField::scalar(bases), PeriodicField::scalar(bases), 0.0};
    out.z.comp[0] = z;
    out.ln_theta = project_scalar(bases, ln_theta_nodes);
    return out;
}

ApproxState fixed_point(const Problem& problem, const SolverControls& controls,
                        BasesPtr bases, const std::optional<ApproxState>& initial) {
    problem.validate();
    if (!(controls.omega > 0.0 && controls.omega <= 1.0))
        throw ParameterError("fixed_point: omega must be in (0, 1]");
    if (controls.lambda_steps < 1)
        throw ParameterError("fixed_point: lambda_steps must be >= 1");
    if (!bases)
        bases = build_bases(problem.domain, problem.approx.N_t, problem.approx.N_x);
    const Bases& b = *bases;

    // start from the lambda = 0 solution: u = 0, theta = 1 (Z = 0)
    ApproxState st;
    st.bases = bases;
    st.u = PeriodicField::velocity(bases);
    st.ln_theta = PeriodicField::scalar(bases);
    st.z = PeriodicField::scalar(bases);
    if (initial) {
        st.u = initial->u;
        st.ln_theta = initial->ln_theta;
        st.z = initial->z;
    }
    st.rho = PeriodicField::scalar(bases);

    auto has_nan = [](const PeriodicField& f, int n) {
        for (int c = 0; c < n; ++c)
            if (!f.comp[c].allFinite()) return true;
        return false;
    };

    const ZOperator z_op(b, problem.approx.tau);

    const int k_steps = controls.lambda_steps;
    for (int k = 1; k <= k_steps; ++k) {
        const double lam = problem.approx.lambda * k / k_steps;
        bool step_converged = false;
        for (int iter = 1; iter <= controls.max_iter; ++iter) {
            st.rho = solve_continuity(st.u, problem);
            if (has_nan(st.rho, 1))
                throw SolverError("fixed_point: NaN density at lambda=" +
                                  std::to_string(lam));

            // residuals of the current iterate, from the assembled systems
            const Nodal ce_res = continuity_residual_nodes(st.rho, st.u, problem);
            const Eigen::VectorXd ce_pair =
                pair_against(b.st_scalar_val(), b.st_weights(), ce_res);
            const double res_ce = ce_pair.norm() / (1.0 + problem.approx.eps);

            const LinearSystem me = assemble_momentum(st.rho, st.u, st.ln_theta, problem, lam);
            const double res_me =
                rel_residual(me.mat * velocity_coefficients(st.u) - me.rhs, me.rhs);

            const HeatData hd = build_heat_data(st.rho, st.u, problem);
            const Eigen::VectorXd z_rhs =
                lam * heat_source_pairings(hd, theta_nodes(st.ln_theta),
                                           face_theta_from_field(st.ln_theta), problem);
            const double res_z = rel_residual(z_op.mat * st.z.comp[0] - z_rhs, z_rhs);

            // one application of the map (temperature implicit in z)
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(me.mat);
            const Eigen::VectorXd u_new_vec = lu.solve(me.rhs);
            const TemperatureSolve te =
                solve_temperature_coupled(st.rho, st.u, st.ln_theta, problem, lam);

            if (!u_new_vec.allFinite() || has_nan(te.ln_theta, 1) || has_nan(te.z, 1))
                throw SolverError("fixed_point: NaN iterate at lambda=" +
                                  std::to_string(lam) + ", iter=" + std::to_string(iter));

            const Eigen::VectorXd u_cur = velocity_coefficients(st.u);
            const double du = (u_new_vec - u_cur).norm() / (1.0 + u_new_vec.norm());
            const double dl = (te.ln_theta.comp[0] - st.ln_theta.comp[0]).norm() /
                              (1.0 + te.ln_theta.comp[0].norm());
            const double update_norm = du + dl;

            IterationRecord rec;
            rec.lambda = lam;
            rec.iter = iter;
            rec.update_norm = update_norm;
            rec.res_continuity = res_ce;
            rec.res_momentum = res_me;
            rec.res_temperature = res_z;
            rec.min_rho = eval_nodes(st.rho).minCoeff();
            rec.min_theta = std::exp(eval_nodes(st.ln_theta).minCoeff());
            st.trace.push_back(rec);

            if (update_norm <= controls.tol && res_ce <= controls.tol &&
                res_me <= controls.tol && res_z <= controls.tol) {
                step_converged = true; // keep the measured iterate
                break;
            }
            const double om = controls.omega;
            const int nvc = b.velocity_component_dim();
            for (int c = 0; c < 3; ++c)
                st.u.comp[c] += om * (u_new_vec.segment(c * nvc, nvc) - st.u.comp[c]);
            st.ln_theta.comp[0] += om * (te.ln_theta.comp[0] - st.ln_theta.comp[0]);
            st.z.comp[0] += om * (te.z.comp[0] - st.z.comp[0]);
        }
        if (!step_converged) {
            st.converged = false;
            st.failure_reason = "max_iter reached at lambda=" + std::to_string(lam);
            st.rho = solve_continuity(st.u, problem);
            st.lambda = lam;
            return st;
        }
    }

    // refresh the derived fields at the converged velocity so the stored
    // state satisfies the continuity and temperature systems to machine
    // accuracy (the audited identities live at the f^2 scale)
    st.rho = solve_continuity(st.u, problem);
    {
        const TemperatureSolve te = solve_temperature_coupled(
            st.rho, st.u, st.ln_theta, problem, problem.approx.lambda);
        st.z = te.z;
        st.ln_theta = te.ln_theta;
    }
    st.lambda = problem.approx.lambda;
    st.converged = true;

    const Nodal rho_n = eval_nodes(st.rho);
    st.min_rho = rho_n.minCoeff();
    const Eigen::VectorXd mass = integrate_space(b, rho_n);
    st.mass_err = (mass.array() - problem.domain.M0).abs().maxCoeff();
    const double m = problem.domain.mean_density();
    if (st.min_rho < -1e-6 * m) {
        st.converged = false;
        st.failure_reason = "density undershoot below -1e-6 m";
    }
    return st;
}

} // namespace nsfp
