#include <doctest.h>

#include <cmath>
#include <random>

#include "nsfp/constitutive.hpp"

using namespace nsfp;

namespace {

ConstitutiveParams example_params() {
    ConstitutiveParams p;
    p.gamma = 5.0 / 3.0;
    p.c_v = 1.0;
    p.a_rad = 3.0;
    return p;
}

} // namespace

TEST_CASE("thermo_eval matches the closed forms") {
    const ConstitutiveParams p = example_params();
    const ThermoEval te = thermo_eval(1.0, 1.0, p);
    CHECK(te.p == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(te.e == doctest::Approx(5.5).epsilon(1e-14)); // 3/2 + 1 + 3
    CHECK(te.s == doctest::Approx(4.0).epsilon(1e-14)); // ln 1 + 4
    CHECK(te.e_defined);
    CHECK(te.s_defined);
}

TEST_CASE("thermo_eval vacuum keeps only the radiation pressure") {
    ConstitutiveParams p = example_params();
    const ThermoEval te = thermo_eval(0.0, 2.0, p);
    CHECK(te.p == doctest::Approx(16.0).epsilon(1e-14));
    CHECK_FALSE(te.e_defined);
    CHECK_FALSE(te.s_defined);
}

TEST_CASE("thermo_eval rejects bad inputs") {
    const ConstitutiveParams p = example_params();
    CHECK_THROWS_AS(thermo_eval(-1.0, 1.0, p), DomainError);
    CHECK_THROWS_AS(thermo_eval(1.0, 0.0, p), DomainError);
    CHECK_THROWS_AS(gibbs_residual(1.0, 1.0, p, 0.0), ParameterError);
    CHECK_THROWS_AS(gibbs_residual(1.0, 1.0, p, -1e-4), ParameterError);
}

TEST_CASE("internal energy agrees with Gibbs integration of the entropy") {
    // de/dtheta = theta ds/dtheta; integrate from theta = 1 with FD slopes of s
    const ConstitutiveParams p = example_params();
    const double rho = 1.3, theta_final = 1.9, h = 1e-5;
    const int steps = 2000;
    double e_int = thermo_eval(rho, 1.0, p).e;
    const double dt = (theta_final - 1.0) / steps;
    for (int i = 0; i < steps; ++i) {
        const double t_mid = 1.0 + (i + 0.5) * dt;
        const double ds = (thermo_eval(rho, t_mid + h, p).s -
                           thermo_eval(rho, t_mid - h, p).s) /
                          (2.0 * h);
        e_int += t_mid * ds * dt;
    }
    CHECK(e_int == doctest::Approx(thermo_eval(rho, theta_final, p).e).epsilon(1e-6));
}

TEST_CASE("Gibbs residuals vanish to FD truncation order") {
    const ConstitutiveParams p = example_params();
    {
        const auto r = gibbs_residual(1.0, 1.0, p, 1e-4);
        CHECK(std::abs(r[0]) <= 1e-6);
        CHECK(std::abs(r[1]) <= 1e-6);
    }
    {
        const auto r = gibbs_residual(2.0, 0.5, p, 1e-4);
        CHECK(std::abs(r[0]) <= 1e-6);
        CHECK(std::abs(r[1]) <= 1e-6);
    }
}

TEST_CASE("Gibbs residual detects a broken pressure") {
    const ConstitutiveParams p = example_params();
    auto p_fn = [&](double r, double t) { return thermo_eval(r, t, p).p + 1.0; };
    auto e_fn = [&](double r, double t) { return thermo_eval(r, t, p).e; };
    auto s_fn = [&](double r, double t) { return thermo_eval(r, t, p).s; };
    const auto r = gibbs_residual(1.0, 1.0, 1e-4, p_fn, e_fn, s_fn);
    // d(1/rho)/drho = -1 at rho = 1, so a unit pressure offset gives |r_rho| = 1
    CHECK(std::abs(r[1]) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(r[0]) <= 1e-6);
}

TEST_CASE("Gibbs residuals over random states, scaled to the local magnitudes") {
    const ConstitutiveParams p = example_params();
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> logu(-3.0, 3.0);
    for (int i = 0; i < 300; ++i) {
        const double rho = std::pow(10.0, logu(rng));
        const double theta = std::pow(10.0, logu(rng));
        const double h = 1e-4 * std::min(rho, theta);
        const auto r = gibbs_residual(rho, theta, p, h);
        // scale by the sizes of the partials the relation combines
        const double e_t = p.c_v + 4.0 * p.a_rad * theta * theta * theta / rho;
        const double e_r = std::pow(rho, p.gamma - 2.0) +
                           p.a_rad * std::pow(theta, 4) / (rho * rho) +
                           thermo_eval(rho, theta, p).p / (rho * rho);
        CHECK(std::abs(r[0]) / std::max(1.0, e_t) <= 1e-6);
        CHECK(std::abs(r[1]) / std::max(1.0, e_r) <= 1e-6);
    }
}

TEST_CASE("transport coefficients and the boundary coefficient bounds") {
    ConstitutiveParams p = example_params();
    p.mu0 = 1.0;
    p.kappa0 = 1.0;
    p.d0 = 1.0;
    p.d_variant = DVariant::TEMP_DEPENDENT;
    {
        const TransportEval tr = transport_eval(1.0, p);
        CHECK(tr.mu == doctest::Approx(2.0));
        CHECK(tr.kappa == doctest::Approx(2.0));
        CHECK(tr.d == doctest::Approx(3.0));
        // strict (dep) bounds with C = 2 d0
        CHECK(p.d0 * 2.0 < tr.d);
        CHECK(tr.d < 2.0 * p.d0 * 2.0);
    }
    {
        const TransportEval tr = transport_eval(1e-12, p);
        CHECK(tr.mu == doctest::Approx(p.mu0).epsilon(1e-9));
        CHECK(tr.kappa == doctest::Approx(p.kappa0).epsilon(1e-9));
    }
    p.d_variant = DVariant::TEMP_INDEPENDENT;
    CHECK(transport_eval(7.0, p).d == doctest::Approx(p.d0));

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> logu(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const double th = std::pow(10.0, logu(rng));
        const TransportEval tr = transport_eval(th, p);
        const double th3 = th * th * th;
        CHECK(tr.mu >= p.mu0 * (1.0 + th) * (1.0 - 1e-14));
        CHECK(tr.kappa >= p.kappa0 * (1.0 + th3) * (1.0 - 1e-14));
        CHECK(tr.kappa <= p.kappa0 * (1.0 + th3) * (1.0 + 1e-14));
    }
}

TEST_CASE("dissipation: stress shapes and the frozen shear value") {
    ConstitutiveParams p = example_params();
    p.mu0 = 1.0; // mu(1) = 2
    p.eta0 = 0.0;
    const std::array<double, 3> zero_gt{0.0, 0.0, 0.0};

    std::array<std::array<double, 3>, 3> gu{};
    SUBCASE("no motion, no dissipation") {
        const auto d = dissipation_eval(1.0, gu, zero_gt, p);
        CHECK(d.sigma_density == doctest::Approx(0.0));
    }
    SUBCASE("isotropic dilation is annihilated with eta = 0") {
        for (int i = 0; i < 3; ++i) gu[i][i] = 1.0;
        const auto d = dissipation_eval(1.0, gu, zero_gt, p);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(d.stress[i][j] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(d.sigma_density == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("simple shear, cross-checked by a brute-force contraction") {
        gu[0][1] = 1.0; // grad_u = e1 (x) e2
        const auto d = dissipation_eval(1.0, gu, zero_gt, p);
        // independent contraction of the Stokes form
        const double mu = 2.0, eta = 0.0;
        const double div_u = gu[0][0] + gu[1][1] + gu[2][2];
        double s_gu = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double sij = mu * (gu[i][j] + gu[j][i]);
                if (i == j) sij += (eta - 2.0 / 3.0 * mu) * div_u;
                s_gu += sij * gu[i][j];
            }
        CHECK(s_gu == doctest::Approx(2.0)); // mu * |Du|^2 / 2 with |Du|^2 = 2
        CHECK(d.sigma_density == doctest::Approx(s_gu).epsilon(1e-14));
    }
}

TEST_CASE("entropy production density is nonnegative for random inputs") {
    ConstitutiveParams p = example_params();
    p.eta0 = 0.3;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> logu(-2.0, 2.0);
    for (int k = 0; k < 500; ++k) {
        std::array<std::array<double, 3>, 3> gu{};
        std::array<double, 3> gt{};
        for (auto& row : gu)
            for (auto& v : row) v = u(rng);
        for (auto& v : gt) v = u(rng);
        const double th = std::pow(10.0, logu(rng));
        CHECK(dissipation_eval(th, gu, gt, p).sigma_density >= -1e-12);
    }
}

TEST_CASE("p and e are nondecreasing in theta at fixed rho") {
    const ConstitutiveParams p = example_params();
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> logu(-2.0, 2.0);
    for (int k = 0; k < 200; ++k) {
        const double rho = std::pow(10.0, logu(rng));
        const double t1 = std::pow(10.0, logu(rng));
        const double t2 = t1 * 1.1;
        CHECK(thermo_eval(rho, t2, p).p >= thermo_eval(rho, t1, p).p);
        CHECK(thermo_eval(rho, t2, p).e >= thermo_eval(rho, t1, p).e);
    }
}

TEST_CASE("pow_signed keeps odd symmetry") {
    CHECK(pow_signed(2.0, 1.7) == doctest::Approx(std::pow(2.0, 1.7)));
    CHECK(pow_signed(-2.0, 1.7) == doctest::Approx(-std::pow(2.0, 1.7)));
    CHECK(pow_signed(0.0, 1.7) == 0.0);
}

TEST_CASE("regime flags follow the d variant") {
    ConstitutiveParams p;
    p.gamma = 1.55;
    p.d_variant = DVariant::TEMP_DEPENDENT;
    CHECK(p.regime_ok()); // 1.55 > 23/15
    p.d_variant = DVariant::TEMP_INDEPENDENT;
    CHECK_FALSE(p.regime_ok()); // 1.55 < 8/5
    p.gamma = 1.7;
    CHECK(p.regime_ok());
}
