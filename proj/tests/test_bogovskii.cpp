#include <doctest.h>

#include <cmath>
#include <random>

#include "nsfp/bogovskii.hpp"

using namespace nsfp;

namespace {

DomainSpec test_domain() {
    DomainSpec d;
    d.period_L = 1.0;
    d.box = {1.0, 1.2, 0.8};
    d.M0 = d.volume();
    return d;
}

PeriodicField random_velocity(BasesPtr b, unsigned seed) {
    PeriodicField f = PeriodicField::velocity(b);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& c : f.comp)
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = u(rng);
    return f;
}

Nodal center_slices(const Bases& b, Nodal v) {
    const Eigen::VectorXd means = integrate_space(b, v) / b.volume();
    const int nsp = b.n_space_nodes();
    for (int it = 0; it < b.n_time_nodes(); ++it)
        v.segment(static_cast<Eigen::Index>(it) * nsp, nsp) -= means[it];
    return v;
}

} // namespace

TEST_CASE("zero data gives the zero field") {
    const BasesPtr b = build_bases(test_domain(), 1, 2);
    const BogovskiiResult r = bogovskii_solve(b, Nodal::Zero(b->n_nodes()));
    CHECK(r.divergence_residual <= 1e-14);
    for (int c = 0; c < 3; ++c) CHECK(r.phi.coef[c].cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("preimage consistency: div of a known field is inverted exactly") {
    const BasesPtr b = build_bases(test_domain(), 1, 2);
    const PeriodicField w = random_velocity(b, 3);
    const Nodal f = eval_nodes_div(w);
    const BogovskiiResult r = bogovskii_solve(b, f);
    CHECK(r.divergence_residual <= 1e-10);
    for (int c = 0; c < 3; ++c) {
        const Nodal diff = r.phi.eval(c) - eval_nodes(w, c);
        CHECK(diff.abs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("divergence residual decreases under refinement") {
    const DomainSpec d = test_domain();
    double prev = 1e300;
    for (int n_x : {2, 4, 6}) {
        const BasesPtr b = build_bases(d, 1, n_x);
        Nodal f(b->n_nodes());
        for (int it = 0; it < b->n_time_nodes(); ++it)
            for (int isp = 0; isp < b->n_space_nodes(); ++isp)
                f[static_cast<Eigen::Index>(it) * b->n_space_nodes() + isp] =
                    std::cos(M_PI * b->space_node(isp)[0] / d.box[0]);
        // cos(pi x1/l1) already has zero mean on the box
        const BogovskiiResult r = bogovskii_solve(b, center_slices(*b, f));
        CHECK(r.divergence_residual < prev);
        prev = r.divergence_residual;
    }
}

TEST_CASE("linearity of the solve") {
    const BasesPtr b = build_bases(test_domain(), 1, 2);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Nodal f1(b->n_nodes()), f2(b->n_nodes());
    for (Eigen::Index i = 0; i < f1.size(); ++i) {
        f1[i] = u(rng);
        f2[i] = u(rng);
    }
    f1 = center_slices(*b, f1);
    f2 = center_slices(*b, f2);
    const double al = 1.7, be = -0.4;
    const BogovskiiResult r1 = bogovskii_solve(b, f1);
    const BogovskiiResult r2 = bogovskii_solve(b, f2);
    const BogovskiiResult r12 = bogovskii_solve(b, Nodal(al * f1 + be * f2));
    for (int c = 0; c < 3; ++c) {
        const Eigen::MatrixXd diff =
            r12.phi.coef[c] - al * r1.phi.coef[c] - be * r2.phi.coef[c];
        CHECK(diff.cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("mean removal absorbs constant shifts") {
    const BasesPtr b = build_bases(test_domain(), 1, 2);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Nodal f(b->n_nodes());
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = u(rng);
    const BogovskiiResult r1 = bogovskii_solve(b, center_slices(*b, f));
    const BogovskiiResult r2 = bogovskii_solve(b, center_slices(*b, Nodal(f + 3.7)));
    for (int c = 0; c < 3; ++c)
        CHECK((r1.phi.coef[c] - r2.phi.coef[c]).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("nonzero-mean data is rejected") {
    const BasesPtr b = build_bases(test_domain(), 1, 2);
    CHECK_THROWS_AS(bogovskii_solve(b, Nodal::Constant(b->n_nodes(), 1.0)),
                    PreconditionError);
}

TEST_CASE("the discrete bound constant is recorded") {
    const BasesPtr b = build_bases(test_domain(), 1, 3);
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Nodal f(b->n_nodes());
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = u(rng);
    const BogovskiiResult r = bogovskii_solve(b, center_slices(*b, f));
    const double c_n = r.grad_norm / r.data_norm;
    CHECK(c_n > 0.0);
    CHECK(std::isfinite(c_n));
}
