#include "nsfp/bogovskii.hpp"

#include <cmath>

namespace nsfp {

Nodal SliceVelocity::eval(int component) const {
    const int nsp = bases->n_space_nodes();
    Nodal out(static_cast<Eigen::Index>(bases->n_time_nodes()) * nsp);
    for (int it = 0; it < bases->n_time_nodes(); ++it)
        out.segment(static_cast<Eigen::Index>(it) * nsp, nsp) =
            (bases->x_velocity_val() * coef[component].row(it).transpose()).array();
    return out;
}

Nodal SliceVelocity::eval_grad(int axis, int component) const {
    const int nsp = bases->n_space_nodes();
    Nodal out(static_cast<Eigen::Index>(bases->n_time_nodes()) * nsp);
    for (int it = 0; it < bases->n_time_nodes(); ++it)
        out.segment(static_cast<Eigen::Index>(it) * nsp, nsp) =
            (bases->x_velocity_grad(axis) * coef[component].row(it).transpose()).array();
    return out;
}

Nodal SliceVelocity::eval_div() const {
    Nodal out = eval_grad(0, 0);
    out += eval_grad(1, 1);
    out += eval_grad(2, 2);
    return out;
}

double SliceVelocity::grad_norm() const {
    double s = 0.0;
    for (int it = 0; it < bases->n_time_nodes(); ++it)
        for (int c = 0; c < 3; ++c) s += coef[c].row(it).squaredNorm();
    return std::sqrt(bases->time_weight() * s);
}

BogovskiiResult bogovskii_solve(BasesPtr bases, const Nodal& f, double mean_tol) {
    const Bases& b = *bases;
    if (f.size() != b.n_nodes()) throw ContractError("bogovskii_solve: nodal size mismatch");

    const int nsp = b.n_space_nodes();
    const int nsv = b.n_space_velocity();
    const double vol = b.volume();

    const Eigen::VectorXd slice_int = integrate_space(b, f);
    const double scale = std::max(1.0, std::sqrt((b.st_weights().array() * f * f).sum()));
    for (int it = 0; it < b.n_time_nodes(); ++it)
        if (std::abs(slice_int[it]) / vol > mean_tol * scale)
            throw PreconditionError("bogovskii_solve: data has nonzero spatial mean");

    // normal equations of min || div phi - f ||_{L^2(Omega)} over the basis
    Eigen::MatrixXd normal(3 * nsv, 3 * nsv);
    for (int c = 0; c < 3; ++c)
        for (int cc = 0; cc < 3; ++cc)
            normal.block(c * nsv, cc * nsv, nsv, nsv) =
                b.x_velocity_grad(c).transpose() * b.space_weights().asDiagonal() *
                b.x_velocity_grad(cc);

    BogovskiiResult out;
    Eigen::LLT<Eigen::MatrixXd> llt(normal);
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    if (llt.info() != Eigen::Success) {
        out.regularized = true;
        normal.diagonal().array() += 1e-12 * normal.diagonal().maxCoeff();
        ldlt.compute(normal);
    }

    out.phi.bases = bases;
    for (auto& m : out.phi.coef) m.setZero(b.n_time_nodes(), nsv);

    double res_sq = 0.0;
    for (int it = 0; it < b.n_time_nodes(); ++it) {
        const Eigen::ArrayXd f_slice = f.segment(static_cast<Eigen::Index>(it) * nsp, nsp);
        Eigen::VectorXd rhs(3 * nsv);
        for (int c = 0; c < 3; ++c)
            rhs.segment(c * nsv, nsv) = b.x_velocity_grad(c).transpose() *
                                        (b.space_weights().array() * f_slice).matrix();
        const Eigen::VectorXd sol =
            out.regularized ? Eigen::VectorXd(ldlt.solve(rhs)) : Eigen::VectorXd(llt.solve(rhs));
        Eigen::ArrayXd div_slice = Eigen::ArrayXd::Zero(nsp);
        for (int c = 0; c < 3; ++c) {
            out.phi.coef[c].row(it) = sol.segment(c * nsv, nsv).transpose();
            div_slice += (b.x_velocity_grad(c) * sol.segment(c * nsv, nsv)).array();
        }
        res_sq += b.time_weight() *
                  (b.space_weights().array() * (div_slice - f_slice).square()).sum();
    }
    out.divergence_residual = std::sqrt(res_sq);
    out.data_norm = std::sqrt((b.st_weights().array() * f * f).sum());
    out.grad_norm = out.phi.grad_norm();
    return out;
}

BogovskiiResult bogovskii_solve(const PeriodicField& f, double mean_tol) {
    return bogovskii_solve(f.bases, eval_nodes(f), mean_tol);
}

PeriodicField project_to_velocity_span(const SliceVelocity& sv) {
    const Bases& b = *sv.bases;
    PeriodicField out = PeriodicField::velocity(sv.bases);
    const int nsv = b.n_space_velocity();
    // L^2(S^1) projection of each spatial coefficient's time series
    for (int c = 0; c < 3; ++c)
        for (int kt = 0; kt < b.n_time_velocity(); ++kt) {
            const Eigen::VectorXd w_mode =
                b.time_weight() * b.t_velocity_val().col(kt);
            out.comp[c].segment(static_cast<Eigen::Index>(kt) * nsv, nsv) =
                sv.coef[c].transpose() * w_mode;
        }
    return out;
}

} // namespace nsfp
