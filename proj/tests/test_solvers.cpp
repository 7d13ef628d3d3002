#include <doctest.h>

#include <cmath>
#include <random>

#include "nsfp/auditors.hpp"
#include "nsfp/solvers.hpp"

using namespace nsfp;

namespace {

Problem trivial_problem(int n_t = 1, int n_x = 2) {
    Problem pb;
    pb.constitutive.gamma = 1.7;
    pb.approx = ApproxParams::defaults_for(pb.constitutive);
    pb.approx.N_t = n_t;
    pb.approx.N_x = n_x;
    pb.domain.M0 = pb.domain.volume(); // m = 1
    return pb;
}

Problem forced_problem(double amplitude, int n_t = 1, int n_x = 2) {
    Problem pb = trivial_problem(n_t, n_x);
    pb.domain.force.kind = ForcingSpec::Kind::TRIG;
    pb.domain.force.amplitude = amplitude;
    return pb;
}

PeriodicField random_velocity(BasesPtr b, unsigned seed, double amp) {
    PeriodicField f = PeriodicField::velocity(b);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amp, amp);
    for (auto& c : f.comp)
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = u(rng);
    return f;
}

PeriodicField constant_scalar(BasesPtr b, double value) {
    PeriodicField f = PeriodicField::scalar(b);
    f.comp[0][0] = value * std::sqrt(b->domain().period_L * b->volume());
    return f;
}

} // namespace

TEST_CASE("approx parameter validation") {
    ConstitutiveParams cp;
    cp.gamma = 1.7;
    ApproxParams p = ApproxParams::defaults_for(cp);
    CHECK(p.Gamma == doctest::Approx(4.0));
    CHECK(p.zeta == doctest::Approx(p.delta));
    CHECK(p.eps == doctest::Approx(p.delta * p.delta));
    CHECK_NOTHROW(p.validate(cp));
    ApproxParams bad = p;
    bad.Gamma = 3.0;
    CHECK_THROWS_AS(bad.validate(cp), ParameterError); // Gamma < 2 gamma
    bad = p;
    bad.eps = 1e-2;
    CHECK_THROWS_AS(bad.validate(cp), ParameterError); // eps > delta^2
    bad = p;
    bad.lambda = 1.5;
    CHECK_THROWS_AS(bad.validate(cp), ParameterError);
}

TEST_CASE("continuity with zero velocity returns the constant density") {
    const Problem pb = trivial_problem();
    const BasesPtr b = build_bases(pb.domain, pb.approx.N_t, pb.approx.N_x);
    const PeriodicField u0 = PeriodicField::velocity(b);
    const PeriodicField rho = solve_continuity(u0, pb);
    const Nodal r = eval_nodes(rho);
    CHECK((r - pb.domain.mean_density()).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("the spatial mass is exact for any advecting velocity") {
    const Problem pb = trivial_problem(2, 2);
    const BasesPtr b = build_bases(pb.domain, pb.approx.N_t, pb.approx.N_x);
    for (unsigned seed : {1u, 2u, 3u}) {
        const PeriodicField u = random_velocity(b, seed, 0.3);
        const PeriodicField rho = solve_continuity(u, pb);
        const Eigen::VectorXd mass = integrate_space(*b, eval_nodes(rho));
        CHECK((mass.array() - pb.domain.M0).abs().maxCoeff() <= 1e-10 * pb.domain.M0);
    }
}

TEST_CASE("manufactured density is recovered to solver accuracy") {
    const Problem pb = trivial_problem(1, 2);
    const BasesPtr b = build_bases(pb.domain, pb.approx.N_t, pb.approx.N_x);
    // rho* = m + 0.1 cos(2 pi t/L) cos(pi x1/l1), inside the basis span
    Nodal target(b->n_nodes());
    for (int it = 0; it < b->n_time_nodes(); ++it)
        for (int isp = 0; isp < b->n_space_nodes(); ++isp)
            target[static_cast<Eigen::Index>(it) * b->n_space_nodes() + isp] =
                1.0 +
                0.1 * std::cos(2.0 * M_PI * b->time_nodes()[it] / pb.domain.period_L) *
                    std::cos(M_PI * b->space_node(isp)[0] / pb.domain.box[0]);
    const PeriodicField rho_star = project_scalar(b, target);
    const PeriodicField u = random_velocity(b, 5, 0.05);
    const Nodal source = continuity_residual_nodes(rho_star, u, pb);
    const PeriodicField rho = solve_continuity(u, pb, &source);
    CHECK((rho.comp[0] - rho_star.comp[0]).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("momentum with constant data returns zero velocity") {
    const Problem pb = trivial_problem();
    const BasesPtr b = build_bases(pb.domain, pb.approx.N_t, pb.approx.N_x);
    const PeriodicField u0 = PeriodicField::velocity(b);
    const PeriodicField rho = constant_scalar(b, pb.domain.mean_density());
    const PeriodicField ln_theta = constant_scalar(b, std::log(1.3));
    const PeriodicField u = solve_momentum(rho, u0, ln_theta, pb, 1.0);
    for (int c = 0; c < 3; ++c) CHECK(u.comp[c].cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("temperature solve: zero sources give Z = 0 and theta = 1") {
    Problem pb = trivial_problem();
    pb.domain.theta0 = 1.3; // theta~ = Theta0 kills the boundary source too
    const BasesPtr b = build_bases(pb.domain, pb.approx.N_t, pb.approx.N_x);
    const PeriodicField u0 = PeriodicField::velocity(b);
    const PeriodicField rho = constant_scalar(b, 1.0);
    const PeriodicField ln_theta = constant_scalar(b, std::log(pb.domain.theta0));
    const TemperatureSolve te = solve_temperature(rho, u0, ln_theta, pb, 1.0);
    // the tau-weighted zero mode amplifies assembly round-off by 1/tau
    CHECK(te.z.comp[0].cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((theta_nodes(te.ln_theta) - 1.0).abs().maxCoeff() <= 1e-10);

    // the implicit variant balances the tau term against the boundary flux:
    // tau int z = boundary flux of its own temperature
    const TemperatureSolve tec = solve_temperature_coupled(rho, u0, ln_theta, pb, 1.0);
    const Nodal theta_c = theta_nodes(tec.ln_theta);
    CHECK(theta_c.minCoeff() > 1.0);
    CHECK(theta_c.maxCoeff() < pb.domain.theta0);
}

TEST_CASE("manufactured Kirchhoff image is recovered") {
    Problem pb = trivial_problem(1, 2);
    const BasesPtr b = build_bases(pb.domain, pb.approx.N_t, pb.approx.N_x);
    const double tau = pb.approx.tau;
    const double l1 = pb.domain.box[0], l2 = pb.domain.box[1];
    const double period = pb.domain.period_L;
    // Z* = 0.1 sin(2 pi t/L) cos(pi x1/l1) cos(2 pi x2/l2): in-span, Neumann
    Nodal z_star(b->n_nodes()), source(b->n_nodes());
    for (int it = 0; it < b->n_time_nodes(); ++it)
        for (int isp = 0; isp < b->n_space_nodes(); ++isp) {
            const double t = b->time_nodes()[it];
            const auto x = b->space_node(isp);
            const double wt = 2.0 * M_PI / period;
            const double k1 = M_PI / l1, k2 = 2.0 * M_PI / l2;
            const double sp = std::cos(k1 * x[0]) * std::cos(k2 * x[1]);
            const double z = 0.1 * std::sin(wt * t) * sp;
            const double z_tt = -wt * wt * z;
            const double z_lap = -(k1 * k1 + k2 * k2) * z;
            z_star[static_cast<Eigen::Index>(it) * b->n_space_nodes() + isp] = z;
            source[static_cast<Eigen::Index>(it) * b->n_space_nodes() + isp] =
                -tau * z_tt + tau * z - z_lap;
        }
    const PeriodicField u0 = PeriodicField::velocity(b);
    const PeriodicField rho = constant_scalar(b, 1.0);
    const PeriodicField ln_theta = constant_scalar(b, std::log(pb.domain.theta0));
    const TemperatureSolve te = solve_temperature(rho, u0, ln_theta, pb, 1.0, &source);
    const PeriodicField z_proj = project_scalar(b, z_star);
    CHECK((te.z.comp[0] - z_proj.comp[0]).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("temperature output stays positive for rough inputs") {
    const Problem pb = forced_problem(0.5);
    const BasesPtr b = build_bases(pb.domain, pb.approx.N_t, pb.approx.N_x);
    for (unsigned seed : {11u, 12u}) {
        const PeriodicField u = random_velocity(b, seed, 0.5);
        PeriodicField ln_theta = PeriodicField::scalar(b);
        std::mt19937_64 rng(seed + 100);
        std::uniform_real_distribution<double> d(-0.3, 0.3);
        for (Eigen::Index i = 0; i < ln_theta.comp[0].size(); ++i)
            ln_theta.comp[0][i] = d(rng);
        const PeriodicField rho = solve_continuity(u, pb);
        const TemperatureSolve te = solve_temperature(rho, u, ln_theta, pb, 1.0);
        CHECK(theta_nodes(te.ln_theta).minCoeff() > 0.0);
    }
}

TEST_CASE("trivial fixed point: (m, 0, 1) within three iterations") {
    const Problem pb = trivial_problem(2, 2);
    SolverControls ctl;
    ctl.lambda_steps = 1;
    const ApproxState st = fixed_point(pb, ctl);
    CHECK(st.converged);
    CHECK(st.trace.size() <= 3);
    for (int c = 0; c < 3; ++c) CHECK(st.u.comp[c].cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(st.ln_theta.comp[0].cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((eval_nodes(st.rho) - pb.domain.mean_density()).abs().maxCoeff() <= 1e-9);
    CHECK(st.mass_err <= 1e-9 * pb.domain.M0);
}

TEST_CASE("lambda = 0 decouples to the zero velocity") {
    Problem pb = forced_problem(0.5);
    pb.approx.lambda = 0.0;
    SolverControls ctl;
    ctl.lambda_steps = 1;
    const ApproxState st = fixed_point(pb, ctl);
    CHECK(st.converged);
    for (int c = 0; c < 3; ++c) CHECK(st.u.comp[c].cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("small forcing converges with clean residuals and invariants") {
    const Problem pb = forced_problem(1e-2);
    SolverControls ctl;
    ctl.tol = 1e-9;
    const ApproxState st = fixed_point(pb, ctl);
    REQUIRE(st.converged);
    CHECK(st.mass_err <= 1e-9 * pb.domain.M0);
    CHECK(st.min_rho > -1e-6 * pb.domain.mean_density());
    CHECK(theta_nodes(st.ln_theta).minCoeff() > 0.0);

    const GalerkinResiduals res = galerkin_residuals(st, pb);
    CHECK(res.continuity <= 1e-8);
    CHECK(res.momentum <= 1e-8);
    CHECK(res.temperature <= 1e-8);

    // applying the driver's map once more moves the coefficients by <= 10 tol
    const PeriodicField rho = solve_continuity(st.u, pb);
    const PeriodicField u2 = solve_momentum(rho, st.u, st.ln_theta, pb, st.lambda);
    const TemperatureSolve te2 =
        solve_temperature_coupled(rho, st.u, st.ln_theta, pb, st.lambda);
    double move = 0.0;
    for (int c = 0; c < 3; ++c)
        move = std::max(move, (u2.comp[c] - st.u.comp[c]).cwiseAbs().maxCoeff());
    move = std::max(move,
                    (te2.ln_theta.comp[0] - st.ln_theta.comp[0]).cwiseAbs().maxCoeff());
    CHECK(move <= 10.0 * ctl.tol);
}

TEST_CASE("homotopy and direct solves agree (reported, not enforced)") {
    const Problem pb = forced_problem(1e-2);
    SolverControls direct;
    direct.lambda_steps = 1;
    SolverControls homotopy;
    homotopy.lambda_steps = 5;
    const ApproxState s1 = fixed_point(pb, direct);
    const ApproxState s2 = fixed_point(pb, homotopy);
    REQUIRE(s1.converged);
    REQUIRE(s2.converged);
    double diff = 0.0;
    for (int c = 0; c < 3; ++c)
        diff = std::max(diff, (s1.u.comp[c] - s2.u.comp[c]).cwiseAbs().maxCoeff());
    diff = std::max(diff, (s1.ln_theta.comp[0] - s2.ln_theta.comp[0]).cwiseAbs().maxCoeff());
    // uniqueness is not claimed; disagreement would be reported, not failed
    WARN_MESSAGE(diff <= 100.0 * direct.tol,
                 "homotopy/direct fixed points differ by ", diff);
    CHECK(std::isfinite(diff));
}

TEST_CASE("tau = 0 heat solve pins the compatibility modes") {
    Problem pb = trivial_problem();
    pb.approx.tau = 0.0;
    const BasesPtr b = build_bases(pb.domain, pb.approx.N_t, pb.approx.N_x);
    const PeriodicField u0 = PeriodicField::velocity(b);
    const PeriodicField rho = constant_scalar(b, 1.0);
    const PeriodicField ln_theta = constant_scalar(b, 0.0);
    const TemperatureSolve te = solve_temperature(rho, u0, ln_theta, pb, 1.0);
    CHECK(std::isfinite(te.pinned_compat));
    CHECK(te.z.comp[0].allFinite());
}
