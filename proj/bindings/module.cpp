#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nsfp/run.hpp"

namespace py = pybind11;
using namespace nsfp;

namespace {

ConstitutiveParams params_from_kwargs(double gamma, double c_v, double a_rad, double mu0,
                                      double eta0, double kappa0, double d0,
                                      const std::string& d_variant) {
    ConstitutiveParams p;
    p.gamma = gamma;
    p.c_v = c_v;
    p.a_rad = a_rad;
    p.mu0 = mu0;
    p.eta0 = eta0;
    p.kappa0 = kappa0;
    p.d0 = d0;
    if (d_variant == "TEMP_DEPENDENT") p.d_variant = DVariant::TEMP_DEPENDENT;
    else if (d_variant == "TEMP_INDEPENDENT") p.d_variant = DVariant::TEMP_INDEPENDENT;
    else throw ParameterError("d_variant must be TEMP_DEPENDENT or TEMP_INDEPENDENT");
    p.validate();
    return p;
}

py::dict window_dict(const ExponentWindow& w) {
    py::dict d;
    d["gamma"] = w.gamma;
    d["case"] = to_string(w.rad_case);
    d["a_low"] = w.a_low;
    d["a_high"] = w.a_high;
    d["empty"] = w.empty;
    d["admissible"] = w.admissible;
    d["binding_term"] = to_string(w.binding);
    d["a_chosen"] = w.a_chosen;
    d["out_of_scope"] = w.out_of_scope;
    return d;
}

RadiationCase case_from(const std::string& s) {
    if (s == "radiation" || s == "RADIATION") return RadiationCase::RADIATION;
    if (s == "no_radiation" || s == "NO_RADIATION") return RadiationCase::NO_RADIATION;
    throw ParameterError("case must be radiation or no_radiation");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "spectral space-time solver for a regularized time-periodic "
              "compressible Navier-Stokes-Fourier scheme";

    m.def(
        "thermo_eval",
        [](double rho, double theta, double gamma, double c_v, double a_rad) {
            ConstitutiveParams p;
            p.gamma = gamma;
            p.c_v = c_v;
            p.a_rad = a_rad;
            const ThermoEval te = thermo_eval(rho, theta, p);
            py::dict d;
            d["p"] = te.p;
            if (te.e_defined) d["e"] = te.e;
            if (te.s_defined) d["s"] = te.s;
            return d;
        },
        py::arg("rho"), py::arg("theta"), py::arg("gamma") = 1.7, py::arg("c_v") = 1.0,
        py::arg("a_rad") = 1.0, "pressure, internal energy and entropy at a point");

    m.def(
        "gibbs_residual",
        [](double rho, double theta, double h, double gamma, double c_v, double a_rad) {
            ConstitutiveParams p;
            p.gamma = gamma;
            p.c_v = c_v;
            p.a_rad = a_rad;
            const auto r = gibbs_residual(rho, theta, p, h);
            return py::make_tuple(r[0], r[1]);
        },
        py::arg("rho"), py::arg("theta"), py::arg("h") = 1e-4, py::arg("gamma") = 1.7,
        py::arg("c_v") = 1.0, py::arg("a_rad") = 1.0);

    m.def(
        "transport_eval",
        [](double theta, double mu0, double eta0, double kappa0, double d0,
           const std::string& d_variant) {
            const ConstitutiveParams p =
                params_from_kwargs(1.7, 1.0, 1.0, mu0, eta0, kappa0, d0, d_variant);
            const TransportEval t = transport_eval(theta, p);
            py::dict d;
            d["mu"] = t.mu;
            d["eta"] = t.eta;
            d["kappa"] = t.kappa;
            d["d"] = t.d;
            return d;
        },
        py::arg("theta"), py::arg("mu0") = 1.0, py::arg("eta0") = 0.0,
        py::arg("kappa0") = 1.0, py::arg("d0") = 1.0,
        py::arg("d_variant") = "TEMP_DEPENDENT");

    m.def(
        "dissipation_eval",
        [](double theta, const std::array<std::array<double, 3>, 3>& grad_u,
           const std::array<double, 3>& grad_theta, double mu0, double eta0,
           double kappa0) {
            ConstitutiveParams p;
            p.mu0 = mu0;
            p.eta0 = eta0;
            p.kappa0 = kappa0;
            const DissipationEval d = dissipation_eval(theta, grad_u, grad_theta, p);
            py::dict out;
            out["stress"] = d.stress;
            out["sigma_density"] = d.sigma_density;
            return out;
        },
        py::arg("theta"), py::arg("grad_u"), py::arg("grad_theta"), py::arg("mu0") = 1.0,
        py::arg("eta0") = 0.0, py::arg("kappa0") = 1.0);

    m.def("discriminant", &discriminant, py::arg("gamma"));

    m.def(
        "a_window",
        [](double gamma, const std::string& rad_case) {
            return window_dict(a_window(gamma, case_from(rad_case)));
        },
        py::arg("gamma"), py::arg("case") = "radiation");

    m.def(
        "interpolation_exponents",
        [](double gamma, double a) {
            const auto ie = interpolation_exponents(gamma, a);
            py::dict d;
            d["p_i"] = ie.p_i;
            d["alpha"] = ie.alpha;
            d["valid"] = ie.valid;
            return d;
        },
        py::arg("gamma"), py::arg("a"));

    m.def(
        "estimate_chain_report",
        [](double gamma, double a, const std::string& rad_case) {
            const ChainReport rep =
                a > 0.0 ? estimate_chain_report(gamma, a, case_from(rad_case))
                        : estimate_chain_report(gamma, case_from(rad_case));
            py::dict d;
            d["gamma"] = rep.gamma;
            d["a"] = rep.a;
            d["case"] = to_string(rep.rad_case);
            d["window"] = window_dict(rep.window);
            d["p_i"] = rep.p_i;
            d["alpha"] = rep.alpha;
            d["p_i_valid"] = rep.p_i_valid;
            d["beta"] = rep.beta;
            d["admissible"] = rep.admissible;
            py::list entries;
            for (const auto& e : rep.entries) {
                py::dict je;
                je["id"] = e.id;
                je["lhs"] = e.lhs;
                je["rhs"] = e.rhs;
                je["strict_ok"] = e.strict_ok;
                entries.append(je);
            }
            d["entries"] = entries;
            return d;
        },
        py::arg("gamma"), py::arg("a") = 0.0, py::arg("case") = "radiation");

    m.def(
        "phi_eval",
        [](double g, double delta, double B, double kappa0) {
            KirchhoffSpec spec{delta, B, kappa0, {}};
            const PhiEval pe = phi_eval(g, spec);
            return py::make_tuple(pe.value, pe.derivative);
        },
        py::arg("g"), py::arg("delta") = 1e-2, py::arg("B") = 6.0, py::arg("kappa0") = 1.0);

    m.def(
        "phi_inverse",
        [](double y, double delta, double B, double kappa0) {
            KirchhoffSpec spec{delta, B, kappa0, {}};
            return phi_inverse(y, spec);
        },
        py::arg("y"), py::arg("delta") = 1e-2, py::arg("B") = 6.0, py::arg("kappa0") = 1.0);

    m.def(
        "solve",
        [](const std::string& config_text) {
            RunConfig cfg = parse_config_text(config_text);
            cfg.validate();
            const ApproxState st = fixed_point(cfg.problem, cfg.controls);
            py::dict d;
            d["converged"] = st.converged;
            d["iterations"] = st.trace.size();
            d["lambda"] = st.lambda;
            d["min_rho"] = st.min_rho;
            d["mass_err"] = st.mass_err;
            if (!st.failure_reason.empty()) d["failure_reason"] = st.failure_reason;
            if (st.converged) {
                const BalanceReport rep = balance_audit(st, cfg.problem);
                d["energy_identity_rel"] = rep.energy.residual_rel;
                d["entropy_sign_min"] = rep.entropy.sign_min;
                d["res_momentum"] = rep.residuals.momentum;
                d["res_continuity"] = rep.residuals.continuity;
                d["res_temperature"] = rep.residuals.temperature;
            }
            return d;
        },
        py::arg("config_text"),
        "run the damped fixed-point solve for a key=value config string");

    m.def(
        "run_single",
        [](const std::string& config_path, const std::string& out_dir) {
            RunConfig cfg = parse_config_file(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            std::ostringstream log;
            const int code = run_single(cfg, log);
            return py::make_tuple(code, log.str());
        },
        py::arg("config_path"), py::arg("out_dir") = "");

    py::register_exception<DomainError>(m, "DomainError");
    py::register_exception<ParameterError>(m, "ParameterError");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<AdmissibilityError>(m, "AdmissibilityError");
}
