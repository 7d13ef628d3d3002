#include "nsfp/field.hpp"

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace nsfp {

PeriodicField PeriodicField::scalar(BasesPtr b) {
    PeriodicField f;
    f.kind = Kind::SCALAR;
    f.bases = std::move(b);
    f.comp[0] = Eigen::VectorXd::Zero(f.bases->scalar_dim());
    return f;
}

PeriodicField PeriodicField::velocity(BasesPtr b) {
    PeriodicField f;
    f.kind = Kind::VELOCITY;
    f.bases = std::move(b);
    for (auto& c : f.comp) c = Eigen::VectorXd::Zero(f.bases->velocity_component_dim());
    return f;
}

namespace {
void require_scalar(const PeriodicField& f) {
    if (f.kind != PeriodicField::Kind::SCALAR)
        throw ContractError("field: scalar field required");
}
void require_velocity(const PeriodicField& f) {
    if (f.kind != PeriodicField::Kind::VELOCITY)
        throw ContractError("field: velocity field required");
}
} // namespace

Nodal eval_nodes(const PeriodicField& f, int component) {
    if (f.kind == PeriodicField::Kind::SCALAR)
        return (f.bases->st_scalar_val() * f.comp[0]).array();
    return (f.bases->st_velocity_val() * f.comp[component]).array();
}

Nodal eval_nodes_dt(const PeriodicField& f, int component) {
    if (f.kind == PeriodicField::Kind::SCALAR)
        return (f.bases->st_scalar_dt() * f.comp[0]).array();
    return (f.bases->st_velocity_dt() * f.comp[component]).array();
}

Nodal eval_nodes_grad(const PeriodicField& f, int axis, int component) {
    if (f.kind == PeriodicField::Kind::SCALAR)
        return (f.bases->st_scalar_grad(axis) * f.comp[0]).array();
    return (f.bases->st_velocity_grad(axis) * f.comp[component]).array();
}

Nodal eval_nodes_lap(const PeriodicField& f) {
    require_scalar(f);
    return (f.bases->st_scalar_lap() * f.comp[0]).array();
}

Nodal eval_nodes_div(const PeriodicField& f) {
    require_velocity(f);
    Nodal out = (f.bases->st_velocity_grad(0) * f.comp[0]).array();
    out += (f.bases->st_velocity_grad(1) * f.comp[1]).array();
    out += (f.bases->st_velocity_grad(2) * f.comp[2]).array();
    return out;
}

Nodal eval_face_nodes(const PeriodicField& f, int face) {
    require_scalar(f);
    return (f.bases->face(face).st_scalar_val * f.comp[0]).array();
}

PeriodicField project_scalar(BasesPtr bases, const Nodal& values) {
    if (values.size() != bases->n_nodes())
        throw ContractError("project_scalar: nodal size mismatch");
    PeriodicField f = PeriodicField::scalar(bases);
    // basis is L^2-orthonormal and the quadrature is exact for mode pairs
    f.comp[0] = bases->st_scalar_val().transpose() *
                (bases->st_weights().array() * values).matrix();
    return f;
}

double integrate_st(const Bases& b, const Nodal& values) {
    if (values.size() != b.n_nodes()) throw ContractError("integrate_st: size mismatch");
    return (b.st_weights().array() * values).sum();
}

Eigen::VectorXd integrate_space(const Bases& b, const Nodal& values) {
    if (values.size() != b.n_nodes())
        throw ContractError("integrate_space: size mismatch");
    const int nsp = b.n_space_nodes();
    Eigen::VectorXd out(b.n_time_nodes());
    for (int it = 0; it < b.n_time_nodes(); ++it)
        out[it] = (b.space_weights().array() *
                   values.segment(static_cast<Eigen::Index>(it) * nsp, nsp))
                      .sum();
    return out;
}

double integrate_boundary(const Bases& b, const std::array<Nodal, 6>& face_values) {
    double total = 0.0;
    for (int f = 0; f < 6; ++f) {
        const auto& face = b.face(f);
        const int nq = b.n_face_nodes();
        if (face_values[f].size() != static_cast<Eigen::Index>(b.n_time_nodes()) * nq)
            throw ContractError("integrate_boundary: size mismatch");
        for (int it = 0; it < b.n_time_nodes(); ++it)
            total += b.time_weight() *
                     (face.weights_x.array() *
                      face_values[f].segment(static_cast<Eigen::Index>(it) * nq, nq))
                         .sum();
    }
    return total;
}

std::vector<double> field_calculus(const PeriodicField& f, FieldOp op,
                                   const std::vector<SpaceTimePoint>& points) {
    const Bases& b = *f.bases;
    std::vector<double> out;
    const int n_ss = b.n_space_scalar();
    const int n_sv = b.n_space_velocity();

    auto scalar_eval = [&](const SpaceTimePoint& pt, auto&& dof_fn) {
        double v = 0.0;
        for (int dof = 0; dof < f.comp[0].size(); ++dof)
            if (f.comp[0][dof] != 0.0) v += f.comp[0][dof] * dof_fn(dof, pt);
        return v;
    };

    for (const auto& pt : points) {
        if (op == FieldOp::BOUNDARY_TRACE) {
            bool on_face = false;
            for (int a = 0; a < 3; ++a) {
                const double tol = 1e-12 * b.domain().box[a];
                if (std::abs(pt.x[a]) <= tol ||
                    std::abs(pt.x[a] - b.domain().box[a]) <= tol)
                    on_face = true;
            }
            if (!on_face) throw DomainError("BOUNDARY_TRACE: point not on a face");
        }
        if (f.kind == PeriodicField::Kind::SCALAR) {
            switch (op) {
            case FieldOp::EVAL:
            case FieldOp::BOUNDARY_TRACE:
                out.push_back(scalar_eval(pt, [&](int dof, const SpaceTimePoint& p) {
                    return b.eval_scalar_dof(dof, p.t, p.x);
                }));
                break;
            case FieldOp::TIME_DERIV:
                out.push_back(scalar_eval(pt, [&](int dof, const SpaceTimePoint& p) {
                    return b.eval_scalar_dof_dt(dof, p.t, p.x);
                }));
                break;
            case FieldOp::GRAD:
                for (int a = 0; a < 3; ++a) {
                    double v = 0.0;
                    for (int dof = 0; dof < f.comp[0].size(); ++dof)
                        if (f.comp[0][dof] != 0.0)
                            v += f.comp[0][dof] * b.eval_scalar_dof_grad(dof, pt.t, pt.x)[a];
                    out.push_back(v);
                }
                break;
            case FieldOp::DIV:
                throw ContractError("field_calculus: DIV needs a velocity field");
            }
            (void)n_ss;
        } else {
            switch (op) {
            case FieldOp::EVAL:
            case FieldOp::BOUNDARY_TRACE:
                for (int c = 0; c < 3; ++c) {
                    double v = 0.0;
                    for (int dof = 0; dof < f.comp[c].size(); ++dof)
                        if (f.comp[c][dof] != 0.0)
                            v += f.comp[c][dof] * b.eval_velocity_dof(dof, pt.t, pt.x);
                    out.push_back(v);
                }
                break;
            case FieldOp::TIME_DERIV:
                throw ContractError("field_calculus: TIME_DERIV off-grid only for scalars");
            case FieldOp::GRAD:
                for (int c = 0; c < 3; ++c)
                    for (int a = 0; a < 3; ++a) {
                        double v = 0.0;
                        for (int dof = 0; dof < f.comp[c].size(); ++dof)
                            if (f.comp[c][dof] != 0.0)
                                v += f.comp[c][dof] *
                                     b.eval_velocity_dof_grad(dof, pt.t, pt.x)[a];
                        out.push_back(v);
                    }
                break;
            case FieldOp::DIV: {
                double v = 0.0;
                for (int c = 0; c < 3; ++c)
                    for (int dof = 0; dof < f.comp[c].size(); ++dof)
                        if (f.comp[c][dof] != 0.0)
                            v += f.comp[c][dof] *
                                 b.eval_velocity_dof_grad(dof, pt.t, pt.x)[c];
                out.push_back(v);
                break;
            }
            }
            (void)n_sv;
        }
    }
    return out;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void put_f64(std::ostream& os, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

constexpr std::uint32_t kMagic = 0x4E534650; // "NSFP"

} // namespace

void write_field(std::ostream& os, const PeriodicField& f) {
    put_u32(os, kMagic);
    put_u32(os, 1); // format version
    put_u32(os, f.kind == PeriodicField::Kind::SCALAR ? 0 : 1);
    put_u32(os, static_cast<std::uint32_t>(f.bases->N_t()));
    put_u32(os, static_cast<std::uint32_t>(f.bases->N_x()));
    put_f64(os, f.bases->domain().period_L);
    for (double l : f.bases->domain().box) put_f64(os, l);
    const int n_comp = f.rank() == 1 ? 1 : 3;
    for (int c = 0; c < n_comp; ++c) {
        put_u32(os, static_cast<std::uint32_t>(f.comp[c].size()));
        for (Eigen::Index i = 0; i < f.comp[c].size(); ++i) put_f64(os, f.comp[c][i]);
    }
}

PeriodicField read_field(std::istream& is, BasesPtr bases) {
    if (get_u32(is) != kMagic) throw ContractError("read_field: bad magic");
    if (get_u32(is) != 1) throw ContractError("read_field: unknown version");
    const std::uint32_t kind = get_u32(is);
    const int n_t = static_cast<int>(get_u32(is));
    const int n_x = static_cast<int>(get_u32(is));
    if (n_t != bases->N_t() || n_x != bases->N_x())
        throw ContractError("read_field: basis size mismatch");
    const double period = get_f64(is);
    double box[3];
    for (double& l : box) l = get_f64(is);
    if (std::abs(period - bases->domain().period_L) > 1e-14 ||
        std::abs(box[0] - bases->domain().box[0]) > 1e-14 ||
        std::abs(box[1] - bases->domain().box[1]) > 1e-14 ||
        std::abs(box[2] - bases->domain().box[2]) > 1e-14)
        throw ContractError("read_field: domain mismatch");

    PeriodicField f = kind == 0 ? PeriodicField::scalar(bases)
                                : PeriodicField::velocity(bases);
    const int n_comp = kind == 0 ? 1 : 3;
    for (int c = 0; c < n_comp; ++c) {
        const auto n = static_cast<Eigen::Index>(get_u32(is));
        if (n != f.comp[c].size()) throw ContractError("read_field: size mismatch");
        for (Eigen::Index i = 0; i < n; ++i) f.comp[c][i] = get_f64(is);
    }
    if (!is) throw ContractError("read_field: truncated stream");
    return f;
}

} // namespace nsfp
