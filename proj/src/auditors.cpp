#include "nsfp/auditors.hpp"

#include <cmath>

namespace nsfp {

namespace {

struct StateNodes {
    Nodal rho, rho_dt, rho_lap;
    Nodal rho_g[3];
    std::array<Nodal, 3> u, u_dt;
    Nodal u_g[3][3]; // u_g[a][c] = d_a u_c
    Nodal div_u;
    Nodal ln_theta, ln_theta_dt;
    Nodal theta, theta_dt;
    Nodal theta_g[3];
    Nodal grad_theta_sq, grad_rho_sq, grad_ln_theta_sq;
    Nodal z;
    Nodal mu, eta, kappa_delta;
    Nodal s_contract_gu; // S(theta, grad u) : grad u
    Nodal s_ac[3][3];
    std::array<Nodal, 3> f;
    Nodal p;     // physical pressure
    Nodal p_tot; // + delta (rho^Gamma + rho^2)
    Nodal rho_e;
};

// The temperature is evaluated from the state's Kirchhoff image z, the
// scheme's own definition ln theta = Phi^{-1}(z): z is in the basis span, so
// its derivatives are exact and the chain rule gives exact nodal derivatives
// of theta. (The ln_theta coefficient field is the serialized carrier; its
// projection truncates the nonlinear part of Phi^{-1}.)
StateNodes state_nodes(const ApproxState& st, const Problem& pb) {
    const Bases& b = *st.bases;
    const KirchhoffSpec ks = pb.approx.kirchhoff(pb.constitutive);
    StateNodes n;
    n.rho = eval_nodes(st.rho);
    n.rho_dt = eval_nodes_dt(st.rho);
    n.rho_lap = eval_nodes_lap(st.rho);
    n.grad_rho_sq = Nodal::Zero(b.n_nodes());
    for (int a = 0; a < 3; ++a) {
        n.rho_g[a] = eval_nodes_grad(st.rho, a);
        n.grad_rho_sq += n.rho_g[a].square();
    }
    for (int c = 0; c < 3; ++c) {
        n.u[c] = eval_nodes(st.u, c);
        n.u_dt[c] = eval_nodes_dt(st.u, c);
        for (int a = 0; a < 3; ++a) n.u_g[a][c] = eval_nodes_grad(st.u, a, c);
    }
    n.div_u = n.u_g[0][0] + n.u_g[1][1] + n.u_g[2][2];

    n.z = eval_nodes(st.z);
    const Nodal z_dt = eval_nodes_dt(st.z);
    Nodal z_g[3];
    for (int a = 0; a < 3; ++a) z_g[a] = eval_nodes_grad(st.z, a);
    n.ln_theta.resize(n.z.size());
    Nodal phi_prime(n.z.size());
    for (Eigen::Index i = 0; i < n.z.size(); ++i) {
        n.ln_theta[i] = phi_inverse(n.z[i], ks);
        phi_prime[i] = phi_eval(n.ln_theta[i], ks).derivative;
    }
    n.theta = n.ln_theta.exp();
    n.ln_theta_dt = z_dt / phi_prime;
    n.theta_dt = n.theta * n.ln_theta_dt;
    n.grad_theta_sq = Nodal::Zero(b.n_nodes());
    n.grad_ln_theta_sq = Nodal::Zero(b.n_nodes());
    for (int a = 0; a < 3; ++a) {
        const Nodal lg = z_g[a] / phi_prime;
        n.theta_g[a] = n.theta * lg;
        n.grad_theta_sq += n.theta_g[a].square();
        n.grad_ln_theta_sq += lg.square();
    }

    const double delta = pb.approx.delta;
    const double bexp = pb.approx.B_exp;
    n.mu = pb.constitutive.mu0 * (1.0 + n.theta);
    n.eta = pb.constitutive.eta0 * (1.0 + n.theta);
    n.kappa_delta = pb.constitutive.kappa0 * (1.0 + n.theta.pow(3)) +
                    delta * n.theta.pow(bexp) + delta / n.theta;

    n.s_contract_gu = Nodal::Zero(b.n_nodes());
    for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c) {
            n.s_ac[a][c] = n.mu * (n.u_g[a][c] + n.u_g[c][a]);
            if (a == c) n.s_ac[a][c] += (n.eta - 2.0 / 3.0 * n.mu) * n.div_u;
            n.s_contract_gu += n.s_ac[a][c] * n.u_g[a][c];
        }

    n.f = force_nodes(b, pb.domain);

    const double g = pb.constitutive.gamma;
    n.p.resize(b.n_nodes());
    n.p_tot.resize(b.n_nodes());
    n.rho_e.resize(b.n_nodes());
    for (Eigen::Index i = 0; i < n.rho.size(); ++i) {
        const double th4 = std::pow(n.theta[i], 4);
        n.p[i] = pow_signed(n.rho[i], g) + n.rho[i] * n.theta[i] +
                 pb.constitutive.a_rad / 3.0 * th4;
        n.p_tot[i] = n.p[i] + delta * (pow_signed(n.rho[i], pb.approx.Gamma) +
                                       n.rho[i] * n.rho[i]);
        n.rho_e[i] = pow_signed(n.rho[i], g) / (g - 1.0) +
                     pb.constitutive.c_v * n.rho[i] * n.theta[i] +
                     pb.constitutive.a_rad * th4;
    }
    return n;
}

double integrate_face_all(const Bases& b, const std::array<Nodal, 6>& vals) {
    return integrate_boundary(b, vals);
}

// per-face nodal theta and d(x, theta), from the Kirchhoff image
struct FaceData {
    std::array<Nodal, 6> theta, d;
};

FaceData face_data(const ApproxState& st, const Problem& pb) {
    const KirchhoffSpec ks = pb.approx.kirchhoff(pb.constitutive);
    FaceData fd;
    for (int f = 0; f < 6; ++f) {
        const auto& face = st.bases->face(f);
        const Nodal z_face = (face.st_scalar_val * st.z.comp[0]).array();
        fd.theta[f].resize(z_face.size());
        fd.d[f].resize(z_face.size());
        for (Eigen::Index i = 0; i < z_face.size(); ++i) {
            fd.theta[f][i] = std::exp(phi_inverse(z_face[i], ks));
            fd.d[f][i] = transport_eval(fd.theta[f][i], pb.constitutive).d;
        }
    }
    return fd;
}

Eigen::VectorXd pair_scalar(const Bases& b, const Nodal& v) {
    return b.st_scalar_val().transpose() * (b.st_weights().array() * v).matrix();
}

double floor_scale(double x) { return std::max(x, 1e-9); }

} // namespace

Nodal sigma_density_nodes(const ApproxState& state, const Problem& problem) {
    const StateNodes n = state_nodes(state, problem);
    return (n.s_contract_gu + n.kappa_delta * n.grad_theta_sq / n.theta) / n.theta;
}

double mass_audit(const ApproxState& state, const Problem& problem) {
    const Eigen::VectorXd mass = integrate_space(*state.bases, eval_nodes(state.rho));
    return (mass.array() - problem.domain.M0).abs().maxCoeff();
}

GalerkinResiduals galerkin_residuals(const ApproxState& state, const Problem& problem) {
    const Bases& b = *state.bases;
    const StateNodes n = state_nodes(state, problem);
    const double lam = state.lambda;
    const double eps = problem.approx.eps;
    const double zeta = problem.approx.zeta;
    const double tau = problem.approx.tau;
    const double m = problem.domain.mean_density();
    const Eigen::VectorXd& w = b.st_weights();
    GalerkinResiduals out;

    // continuity: pointwise strong residual paired with every test function
    {
        const Nodal r = continuity_residual_nodes(state.rho, state.u, problem);
        out.continuity = pair_scalar(b, r).norm() / (1.0 + eps);
    }

    // momentum: term-by-term nodal pairing (independent of the solver assembly)
    {
        const int nvc = b.velocity_component_dim();
        Eigen::VectorXd r(3 * nvc);
        double scale = 1.0;
        for (int c = 0; c < 3; ++c) {
            Nodal val_part = zeta * n.u_dt[c] +
                             lam * (n.rho_dt * n.u[c] + n.rho * n.u_dt[c]) -
                             lam * 0.5 * eps * (m - n.rho) * n.u[c] - lam * n.rho * n.f[c];
            for (int a = 0; a < 3; ++a) val_part += lam * eps * n.rho_g[a] * n.u_g[a][c];
            Eigen::VectorXd rc =
                b.st_velocity_val().transpose() * (w.array() * val_part).matrix();
            for (int a = 0; a < 3; ++a) {
                const Nodal grad_part = n.s_ac[a][c] - lam * n.rho * n.u[a] * n.u[c];
                rc += b.st_velocity_grad(a).transpose() * (w.array() * grad_part).matrix();
            }
            rc -= b.st_velocity_grad(c).transpose() * (w.array() * (lam * n.p_tot)).matrix();
            r.segment(c * nvc, nvc) = rc;
            scale += (b.st_velocity_val().transpose() *
                      (w.array() * (n.rho * n.f[c])).matrix())
                         .norm() +
                     (b.st_velocity_grad(c).transpose() * (w.array() * n.p_tot).matrix())
                         .norm();
        }
        out.momentum = r.norm() / scale;
    }

    // temperature: weak form of the Kirchhoff solve with the state's own data
    {
        const Nodal z_dt = eval_nodes_dt(state.z);
        Nodal z_g[3];
        for (int a = 0; a < 3; ++a) z_g[a] = eval_nodes_grad(state.z, a);

        Eigen::VectorXd r =
            tau * (b.st_scalar_dt().transpose() * (w.array() * z_dt).matrix());
        r += tau * pair_scalar(b, n.z);
        for (int a = 0; a < 3; ++a)
            r += b.st_scalar_grad(a).transpose() * (w.array() * z_g[a]).matrix();

        Eigen::VectorXd rhs = b.st_scalar_dt().transpose() *
                              (w.array() * (zeta * n.theta + n.rho_e)).matrix();
        for (int a = 0; a < 3; ++a)
            rhs += b.st_scalar_grad(a).transpose() *
                   (w.array() * (n.rho_e * n.u[a])).matrix();
        Nodal eps_delta_term(n.rho.size());
        for (Eigen::Index i = 0; i < n.rho.size(); ++i)
            eps_delta_term[i] =
                eps * problem.approx.delta *
                (problem.approx.Gamma * pow_signed(n.rho[i], problem.approx.Gamma - 2.0) +
                 2.0) *
                n.grad_rho_sq[i];
        rhs += pair_scalar(b, n.s_contract_gu - n.p * n.div_u + eps_delta_term);
        const FaceData fd = face_data(state, problem);
        for (int f = 0; f < 6; ++f) {
            const auto& face = b.face(f);
            const Nodal g = fd.d[f] * (problem.domain.theta0 - fd.theta[f]);
            Eigen::VectorXd wf(g.size());
            const int nq = b.n_face_nodes();
            for (int it = 0; it < b.n_time_nodes(); ++it)
                wf.segment(static_cast<Eigen::Index>(it) * nq, nq) =
                    b.time_weight() * face.weights_x;
            rhs += face.st_scalar_val.transpose() * (wf.array() * g).matrix();
        }
        out.temperature = (r - lam * rhs).norm() / (1.0 + (lam * rhs).norm());
    }
    return out;
}

BalanceReport balance_audit(const ApproxState& state, const Problem& problem) {
    const Bases& b = *state.bases;
    const StateNodes n = state_nodes(state, problem);
    const FaceData fd = face_data(state, problem);
    const double lam = state.lambda;
    const double eps = problem.approx.eps;
    const double delta = problem.approx.delta;
    const double tau = problem.approx.tau;
    const double big_g = problem.approx.Gamma;
    const double m = problem.domain.mean_density();
    const double theta0 = problem.domain.theta0;

    BalanceReport rep;
    rep.reliable = state.converged;
    rep.regime_ok = problem.constitutive.regime_ok();
    rep.mass_err = mass_audit(state, problem);
    rep.min_rho = n.rho.minCoeff();
    rep.min_theta = n.theta.minCoeff();
    rep.rho_undershoot = rep.min_rho < 0.0;
    rep.residuals = galerkin_residuals(state, problem);

    // ---- energy ----
    EnergyAudit& en = rep.energy;
    en.tau_z_term = tau * integrate_st(b, n.z);
    {
        std::array<Nodal, 6> bvals;
        for (int f = 0; f < 6; ++f)
            bvals[f] = fd.d[f] * (fd.theta[f] - theta0);
        en.boundary_term = integrate_face_all(b, bvals);
    }
    Nodal rho_pow_g(n.rho.size()), rho_pow_gm1(n.rho.size()), rho_pow_gm2(n.rho.size());
    for (Eigen::Index i = 0; i < n.rho.size(); ++i) {
        rho_pow_g[i] = pow_signed(n.rho[i], big_g);
        rho_pow_gm1[i] = pow_signed(n.rho[i], big_g - 1.0);
        rho_pow_gm2[i] = pow_signed(n.rho[i], big_g - 2.0);
    }
    en.pressure_work_delta =
        delta * integrate_st(b, (rho_pow_g + n.rho.square()) * n.div_u);
    Nodal fu = Nodal::Zero(b.n_nodes());
    for (int c = 0; c < 3; ++c) fu += n.f[c] * n.u[c];
    en.forcing_work = integrate_st(b, n.rho * fu);
    en.eps_delta_grad =
        eps * delta * integrate_st(b, (big_g * rho_pow_gm2 + 2.0) * n.grad_rho_sq);
    Nodal u_sq = Nodal::Zero(b.n_nodes());
    for (int c = 0; c < 3; ++c) u_sq += n.u[c].square();
    const Nodal ce_res = continuity_residual_nodes(state.rho, state.u, problem);
    en.ce_pairing = integrate_st(b, ce_res * 0.5 * u_sq);

    en.residual_abs = en.tau_z_term + en.boundary_term -
                      lam * (en.pressure_work_delta + en.forcing_work) -
                      lam * en.eps_delta_grad + lam * en.ce_pairing;
    en.max_term = std::max({std::abs(en.tau_z_term), std::abs(en.boundary_term),
                            std::abs(en.pressure_work_delta), std::abs(en.forcing_work),
                            std::abs(en.eps_delta_grad), std::abs(en.ce_pairing)});
    en.residual_rel = std::abs(en.residual_abs) / floor_scale(en.max_term);

    // closed (renormalized) form: artificial-pressure work rewritten through
    // the renormalized continuity identity; defect is discretization error
    const double t_gg = eps * delta * big_g / (big_g - 1.0) * integrate_st(b, rho_pow_g);
    const double t_g2 = 2.0 * eps * delta * integrate_st(b, n.rho.square());
    const double t_gg_m =
        eps * delta * big_g / (big_g - 1.0) * m * integrate_st(b, rho_pow_gm1);
    const double t_g2_m = 2.0 * eps * delta * m * integrate_st(b, n.rho);
    en.closed_residual_abs = en.tau_z_term + en.boundary_term + lam * (t_gg + t_g2) -
                             lam * (en.forcing_work + t_gg_m + t_g2_m);
    en.closed_residual_rel =
        std::abs(en.closed_residual_abs) /
        floor_scale(std::max({std::abs(en.tau_z_term), std::abs(en.boundary_term),
                              std::abs(en.forcing_work), t_gg, t_g2}));

    en.viscous_work = integrate_st(b, n.s_contract_gu);
    en.pressure_work_total = integrate_st(b, n.p_tot * n.div_u);
    en.uuu_residual_rel =
        std::abs(en.viscous_work -
                 lam * (en.pressure_work_total + en.forcing_work - en.ce_pairing)) /
        floor_scale(std::max({std::abs(en.viscous_work), std::abs(en.pressure_work_total),
                              std::abs(en.forcing_work)}));

    // ---- entropy ----
    EntropyAudit& ent = rep.entropy;
    const Nodal sigma =
        (n.s_contract_gu + n.kappa_delta * n.grad_theta_sq / n.theta) / n.theta;
    ent.sign_min = sigma.minCoeff();
    ent.sign_scale = std::max(1.0, sigma.abs().maxCoeff());

    const KirchhoffSpec kspec = problem.approx.kirchhoff(problem.constitutive);
    const Nodal& phi_val = n.z; // Phi(ln theta) = z exactly under the z-convention
    Nodal phi_prime(n.rho.size());
    for (Eigen::Index i = 0; i < n.rho.size(); ++i)
        phi_prime[i] = phi_eval(n.ln_theta[i], kspec).derivative;
    std::array<Nodal, 6> b_dth0_over, b_dth0, b_d;
    for (int f = 0; f < 6; ++f) {
        b_dth0_over[f] = fd.d[f] * theta0 / fd.theta[f];
        b_dth0[f] = fd.d[f] * theta0;
        b_d[f] = fd.d[f];
    }
    const double diss_kappa = integrate_st(b, n.kappa_delta * n.grad_theta_sq / n.theta.square());
    const double diss_tau =
        tau * integrate_st(b, phi_prime * n.theta_dt.square() / n.theta.pow(3));
    const double diss_s = integrate_st(b, n.s_contract_gu / n.theta);
    Nodal eps_delta_density(n.rho.size());
    for (Eigen::Index i = 0; i < n.rho.size(); ++i)
        eps_delta_density[i] = eps * delta * (big_g * rho_pow_gm2[i] + 2.0) *
                               n.grad_rho_sq[i] / n.theta[i];
    const double diss_eps = integrate_st(b, eps_delta_density);
    const double bnd_dth0_over = integrate_face_all(b, b_dth0_over);

    ent.identity_lhs = diss_kappa + diss_tau + lam * bnd_dth0_over + lam * diss_s +
                       lam * diss_eps;
    // transport combination (div(rho u) + d_t rho)(rho e + p - rho theta s)/(rho theta)
    Nodal gibbs_combo(n.rho.size());
    const double g = problem.constitutive.gamma;
    const double c_v = problem.constitutive.c_v;
    for (Eigen::Index i = 0; i < n.rho.size(); ++i) {
        const double abs_rho = std::max(std::abs(n.rho[i]), 1e-300);
        gibbs_combo[i] = g / (g - 1.0) * pow_signed(n.rho[i], g - 1.0) / n.theta[i] +
                         1.0 + c_v - c_v * n.ln_theta[i] + std::log(abs_rho);
    }
    Nodal transport = n.rho_dt;
    for (int a = 0; a < 3; ++a) transport += n.rho_g[a] * n.u[a];
    transport += n.rho * n.div_u;
    ent.identity_rhs = lam * integrate_face_all(b, b_dth0) +
                       tau * integrate_st(b, phi_val / n.theta) +
                       integrate_st(b, transport * gibbs_combo);
    ent.identity_residual_rel =
        std::abs(ent.identity_lhs - ent.identity_rhs) /
        floor_scale(std::max(std::abs(ent.identity_lhs), std::abs(ent.identity_rhs)));

    ent.dissipation_lhs = diss_s + diss_kappa + bnd_dth0_over;
    ent.boundary_rhs = integrate_face_all(b, b_d);
    ent.direction_margin = ent.boundary_rhs - ent.dissipation_lhs;
    const double slack =
        1e-6 * std::max({1.0, std::abs(ent.dissipation_lhs), std::abs(ent.boundary_rhs)});
    ent.direction_ok = ent.dissipation_lhs <= ent.boundary_rhs + slack;

    return rep;
}

AprioriReport apriori_report(const ApproxState& state, const Problem& problem,
                             double a_bog) {
    const Bases& b = *state.bases;
    const StateNodes n = state_nodes(state, problem);
    const FaceData fd = face_data(state, problem);
    const double gamma = problem.constitutive.gamma;
    const double zeta = problem.approx.zeta;
    const double delta = problem.approx.delta;
    const double big_g = problem.approx.Gamma;
    const double bexp = problem.approx.B_exp;
    const double a_gamma = a_bog * gamma;

    AprioriReport rep;
    rep.a_bog = a_bog;
    auto& norms = rep.norms;

    Nodal grad_u_sq = Nodal::Zero(b.n_nodes());
    for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c) grad_u_sq += n.u_g[a][c].square();
    norms["u_L2H1_sq"] = integrate_st(b, grad_u_sq);
    norms["grad_theta32_L2_sq"] = integrate_st(b, 2.25 * n.theta * n.grad_theta_sq);
    norms["grad_ln_theta_L2_sq"] = integrate_st(b, n.grad_ln_theta_sq);
    norms["delta_grad_thetaB2_L2_sq"] =
        delta * integrate_st(b, 0.25 * bexp * bexp * n.theta.pow(bexp - 2.0) *
                                    n.grad_theta_sq);

    auto boundary_power = [&](double p) {
        std::array<Nodal, 6> v;
        for (int f = 0; f < 6; ++f) v[f] = fd.theta[f].pow(p);
        return integrate_boundary(b, v);
    };
    norms["theta_L1_boundary"] = boundary_power(1.0);
    norms["theta_L2_boundary_sq"] = boundary_power(2.0);
    norms["theta_L3_boundary_cu"] = boundary_power(3.0);
    norms["theta_L4_boundary"] = std::pow(boundary_power(4.0), 0.25);
    norms["theta_L133_boundary"] = std::pow(boundary_power(13.0 / 3.0), 3.0 / 13.0);
    {
        std::array<Nodal, 6> v;
        for (int f = 0; f < 6; ++f) v[f] = 1.0 / fd.theta[f];
        norms["inv_theta_L1_boundary"] = integrate_boundary(b, v);
    }

    // time-sliced L^p(L^q) norms
    const int nsp = b.n_space_nodes();
    auto slice_lq = [&](const Nodal& v, double q, int it) {
        const auto seg = v.segment(static_cast<Eigen::Index>(it) * nsp, nsp);
        return std::pow((b.space_weights().array() * seg.abs().pow(q)).sum(), 1.0 / q);
    };
    double l3l9 = 0.0, l3l9_alt = 0.0, u_l2l6 = 0.0, rho_l2l65 = 0.0;
    Nodal u_abs = Nodal::Zero(b.n_nodes());
    for (int c = 0; c < 3; ++c) u_abs += n.u[c].square();
    u_abs = u_abs.sqrt();
    const Nodal theta32 = n.theta.pow(1.5);
    for (int it = 0; it < b.n_time_nodes(); ++it) {
        l3l9 += b.time_weight() * std::pow(slice_lq(n.theta, 9.0, it), 3.0);
        l3l9_alt += b.time_weight() * std::pow(slice_lq(theta32, 6.0, it), 2.0);
        u_l2l6 += b.time_weight() * std::pow(slice_lq(u_abs, 6.0, it), 2.0);
        rho_l2l65 += b.time_weight() * std::pow(slice_lq(n.rho, 1.2, it), 2.0);
    }
    rep.theta_l3l9_direct = std::pow(l3l9, 1.0 / 3.0);
    rep.theta_l3l9_via_32 = std::pow(l3l9_alt, 1.0 / 3.0);
    norms["theta_L3L9"] = rep.theta_l3l9_direct;
    norms["u_L2L6"] = std::sqrt(u_l2l6);
    norms["rho_L2L65"] = std::sqrt(rho_l2l65);

    norms["rho_Lagamma"] =
        std::pow(integrate_st(b, n.rho.abs().pow(a_gamma)), 1.0 / a_gamma);
    norms["rho_Lgamma_gamma"] = integrate_st(b, n.rho.abs().pow(gamma));
    norms["theta_L4L4_4"] = integrate_st(b, n.theta.pow(4));
    norms["rho_theta_int"] = integrate_st(b, n.rho * n.theta);

    // energies per time slice
    Nodal u_sq = Nodal::Zero(b.n_nodes());
    for (int c = 0; c < 3; ++c) u_sq += n.u[c].square();
    const Nodal e_density = 0.5 * n.rho * u_sq + n.rho_e;
    Nodal rho_s(n.rho.size());
    const double c_v = problem.constitutive.c_v;
    const double a_rad = problem.constitutive.a_rad;
    for (Eigen::Index i = 0; i < n.rho.size(); ++i) {
        const double abs_rho = std::max(std::abs(n.rho[i]), 1e-300);
        rho_s[i] = n.rho[i] * (c_v * n.ln_theta[i] - std::log(abs_rho)) +
                   4.0 * a_rad / 3.0 * std::pow(n.theta[i], 3);
    }
    Nodal e_delta_density = (zeta + n.rho) * 0.5 * u_sq +
                            zeta * (n.theta - n.ln_theta) + (n.rho_e - rho_s);
    for (Eigen::Index i = 0; i < n.rho.size(); ++i)
        e_delta_density[i] += delta * (pow_signed(n.rho[i], big_g) / (big_g - 1.0) +
                                       n.rho[i] * n.rho[i]);
    const Eigen::VectorXd e_t = integrate_space(b, e_density);
    const Eigen::VectorXd e_delta_t = integrate_space(b, e_delta_density);
    norms["sup_E"] = e_t.maxCoeff();
    norms["sup_E_delta"] = e_delta_t.maxCoeff();

    double sup_theta_l4 = 0.0;
    for (int it = 0; it < b.n_time_nodes(); ++it)
        sup_theta_l4 = std::max(sup_theta_l4, slice_lq(n.theta, 4.0, it));
    norms["sup_theta_L4"] = sup_theta_l4;
    norms["theta32_L2W12"] =
        std::sqrt(integrate_st(b, n.theta.pow(3)) + norms["grad_theta32_L2_sq"]);

    // chain ratios; the unknown constants C are dropped from every rhs
    auto add_ratio = [&rep](const std::string& id, double lhs, double rhs) {
        rep.chain.push_back({id, lhs, rhs, lhs / std::max(rhs, 1e-300)});
    };
    add_ratio("tempr",
              norms["u_L2H1_sq"] + norms["grad_theta32_L2_sq"] +
                  norms["grad_ln_theta_L2_sq"] + norms["inv_theta_L1_boundary"] +
                  norms["theta_L2_boundary_sq"],
              1.0 + norms["theta_L3_boundary_cu"]);
    add_ratio("forcing", boundary_power(1.0) + boundary_power(4.0),
              1.0 + norms["rho_L2L65"] * norms["u_L2L6"]);
    double rho_gamma_interp = 0.0; // int_t ( int rho^gamma )^{1/(3(gamma-1))}
    for (int it = 0; it < b.n_time_nodes(); ++it) {
        const auto seg = n.rho.segment(static_cast<Eigen::Index>(it) * nsp, nsp);
        rho_gamma_interp +=
            b.time_weight() * std::pow((b.space_weights().array() * seg.abs().pow(gamma)).sum(),
                                       1.0 / (3.0 * (gamma - 1.0)));
    }
    add_ratio("tempre", norms["theta_L3L9"], 1.0 + std::pow(rho_gamma_interp, 0.2));
    add_ratio("veloc", norms["u_L2L6"], 1.0 + std::pow(rho_gamma_interp, 0.3));
    add_ratio("teticka", norms["theta_L4L4_4"],
              1.0 + std::pow(norms["rho_Lgamma_gamma"], 1.0 / (5.0 * (gamma - 1.0))) *
                        std::pow(norms["sup_E"], 0.25));
    add_ratio("strycek", norms["rho_theta_int"],
              1.0 + std::pow(norms["rho_Lgamma_gamma"], 8.0 / (45.0 * (gamma - 1.0))));
    add_ratio("super", norms["sup_E"], 1.0 + norms["rho_Lgamma_gamma"]);
    add_ratio("hranice", std::pow(norms["theta_L133_boundary"], 13.0 / 3.0),
              norms["theta32_L2W12"] * std::pow(norms["theta_L3L9"], 1.5) *
                  std::pow(norms["sup_theta_L4"], 4.0 / 3.0));
    return rep;
}

PressureLedger pressure_estimate_test(const ApproxState& state, double a_bog,
                                      const Problem& problem) {
    const Bases& b = *state.bases;
    const RadiationCase rcase = problem.constitutive.d_variant == DVariant::TEMP_DEPENDENT
                                    ? RadiationCase::RADIATION
                                    : RadiationCase::NO_RADIATION;
    const ExponentWindow win = a_window(problem.constitutive.gamma, rcase);
    if (!win.admissible)
        throw AdmissibilityError("pressure_estimate_test: empty exponent window");

    const StateNodes n = state_nodes(state, problem);
    const double lam = state.lambda;
    const double gamma = problem.constitutive.gamma;
    const double eps = problem.approx.eps;
    const double zeta = problem.approx.zeta;
    const double m = problem.domain.mean_density();
    const double q = gamma * (a_bog - 1.0);
    const int nsp = b.n_space_nodes();

    PressureLedger led;

    Nodal b_rho(n.rho.size()), bp_rho(n.rho.size());
    for (Eigen::Index i = 0; i < n.rho.size(); ++i) {
        b_rho[i] = pow_signed(n.rho[i], q);
        bp_rho[i] = q * std::pow(std::abs(n.rho[i]), q - 1.0);
    }

    auto center_slices = [&](const Nodal& v) {
        Nodal out = v;
        const Eigen::VectorXd means = integrate_space(b, v) / b.volume();
        for (int it = 0; it < b.n_time_nodes(); ++it)
            out.segment(static_cast<Eigen::Index>(it) * nsp, nsp) -= means[it];
        return out;
    };

    Nodal mean_part = b_rho - center_slices(b_rho);
    const Nodal f_data = center_slices(b_rho);
    const BogovskiiResult bog = bogovskii_solve(state.bases, f_data);
    led.divergence_residual = bog.divergence_residual;
    led.bog_bound_constant = bog.grad_norm / std::max(bog.data_norm, 1e-300);

    // d_t b(rho) through the renormalized continuity route (no time derivative
    // of the slice data needed), versus the direct chain rule as a diagnostic
    Nodal div_rho_u = n.rho * n.div_u;
    for (int a = 0; a < 3; ++a) div_rho_u += n.rho_g[a] * n.u[a];
    const Nodal route = bp_rho * (-div_rho_u + eps * (n.rho_lap - n.rho + m));
    const Nodal direct = bp_rho * n.rho_dt;
    led.dt_route_mismatch =
        std::sqrt(integrate_st(b, (route - direct).square()));
    const BogovskiiResult bog_dt = bogovskii_solve(state.bases, center_slices(route));

    // raw weak momentum terms tested by Phi (time-derivative terms in the
    // integrated-by-parts form through d_t Phi)
    std::array<Nodal, 3> phi, dphi, grad_phi[3];
    for (int c = 0; c < 3; ++c) {
        phi[c] = bog.phi.eval(c);
        dphi[c] = bog_dt.phi.eval(c);
        for (int a = 0; a < 3; ++a) grad_phi[a][c] = bog.phi.eval_grad(a, c);
    }
    const Nodal div_phi = bog.phi.eval_div();

    Nodal u_dot_dphi = Nodal::Zero(b.n_nodes());
    Nodal conv = Nodal::Zero(b.n_nodes());
    Nodal visc = Nodal::Zero(b.n_nodes());
    Nodal force_phi = Nodal::Zero(b.n_nodes());
    Nodal eps_part = Nodal::Zero(b.n_nodes());
    for (int c = 0; c < 3; ++c) {
        u_dot_dphi += n.u[c] * dphi[c];
        force_phi += n.f[c] * phi[c];
        eps_part += -0.5 * eps * (m - n.rho) * n.u[c] * phi[c];
        for (int a = 0; a < 3; ++a) {
            conv += n.rho * n.u[a] * n.u[c] * grad_phi[a][c];
            visc += n.s_ac[a][c] * grad_phi[a][c];
            eps_part += eps * n.rho_g[a] * n.u_g[a][c] * phi[c];
        }
    }

    led.terms["zeta_time"] = -zeta * integrate_st(b, u_dot_dphi);
    led.terms["time_transport"] = -lam * integrate_st(b, n.rho * u_dot_dphi);
    led.terms["convective"] = -lam * integrate_st(b, conv);
    led.terms["viscous"] = integrate_st(b, visc);
    led.terms["pressure"] = -lam * integrate_st(b, n.p_tot * div_phi);
    led.terms["forcing"] = -lam * integrate_st(b, n.rho * force_phi);
    led.terms["eps_terms"] = lam * integrate_st(b, eps_part);

    led.identity_residual_raw = 0.0;
    led.scale = 0.0;
    led.abs_rhs_sum = 0.0;
    for (const auto& [id, v] : led.terms) {
        led.identity_residual_raw += v;
        led.scale += std::abs(v);
        if (id != "pressure") led.abs_rhs_sum += std::abs(v);
    }

    led.positive_lhs = integrate_st(b, n.p_tot * f_data);
    led.terms["pressure_mean_part"] = integrate_st(b, n.p_tot * mean_part);
    led.rho_a_gamma_integral = integrate_st(b, n.rho.abs().pow(a_bog * gamma));
    led.p_norm = std::sqrt(integrate_st(b, n.p_tot.square()));

    // in-span version: pair the independently assembled momentum residual
    // with the projection of Phi onto the velocity test space
    {
        const PeriodicField w_span = project_to_velocity_span(bog.phi);
        const GalerkinResiduals unused = {};
        (void)unused;
        // re-assemble the residual vector exactly as galerkin_residuals does
        const int nvc = b.velocity_component_dim();
        Eigen::VectorXd r(3 * nvc);
        const Eigen::VectorXd& w = b.st_weights();
        for (int c = 0; c < 3; ++c) {
            Nodal val_part = zeta * n.u_dt[c] +
                             lam * (n.rho_dt * n.u[c] + n.rho * n.u_dt[c]) -
                             lam * 0.5 * eps * (m - n.rho) * n.u[c] -
                             lam * n.rho * n.f[c];
            for (int a = 0; a < 3; ++a) val_part += lam * eps * n.rho_g[a] * n.u_g[a][c];
            Eigen::VectorXd rc =
                b.st_velocity_val().transpose() * (w.array() * val_part).matrix();
            for (int a = 0; a < 3; ++a) {
                const Nodal grad_part = n.s_ac[a][c] - lam * n.rho * n.u[a] * n.u[c];
                rc += b.st_velocity_grad(a).transpose() * (w.array() * grad_part).matrix();
            }
            rc -= b.st_velocity_grad(c).transpose() *
                  (w.array() * (lam * n.p_tot)).matrix();
            r.segment(c * nvc, nvc) = rc;
        }
        double dot = 0.0;
        for (int c = 0; c < 3; ++c)
            dot += w_span.comp[c].dot(r.segment(c * nvc, nvc));
        led.identity_residual_inspan = dot;
    }

    led.within_bound =
        std::abs(led.identity_residual_raw) <=
        std::max(1e-6 * led.scale, led.divergence_residual * led.p_norm);
    return led;
}

} // namespace nsfp
