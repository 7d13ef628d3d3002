#include "nsfp/constitutive.hpp"

#include <cmath>

namespace nsfp {

void ConstitutiveParams::validate() const {
    if (!(gamma > 1.0)) throw ParameterError("constitutive: gamma must be > 1");
    if (!(c_v > 0.0)) throw ParameterError("constitutive: c_v must be > 0");
    if (!(a_rad >= 0.0)) throw ParameterError("constitutive: a_rad must be >= 0");
    if (!(mu0 > 0.0)) throw ParameterError("constitutive: mu0 must be > 0");
    if (!(eta0 >= 0.0)) throw ParameterError("constitutive: eta0 must be >= 0");
    if (!(kappa0 > 0.0)) throw ParameterError("constitutive: kappa0 must be > 0");
    if (!(d0 > 0.0)) throw ParameterError("constitutive: d0 must be > 0");
}

bool ConstitutiveParams::regime_ok() const {
    return d_variant == DVariant::TEMP_DEPENDENT ? gamma > 23.0 / 15.0
                                                 : gamma > 8.0 / 5.0;
}

double pow_signed(double x, double p) {
    if (x >= 0.0) return std::pow(x, p);
    return -std::pow(-x, p);
}

ThermoEval thermo_eval(double rho, double theta, const ConstitutiveParams& params) {
    if (rho < 0.0) throw DomainError("thermo_eval: rho must be >= 0");
    if (!(theta > 0.0)) throw DomainError("thermo_eval: theta must be > 0");

    ThermoEval out;
    const double th4 = theta * theta * theta * theta;
    out.p = std::pow(rho, params.gamma) + rho * theta + params.a_rad / 3.0 * th4;
    if (rho > 0.0) {
        out.e = std::pow(rho, params.gamma - 1.0) / (params.gamma - 1.0) +
                params.c_v * theta + params.a_rad / rho * th4;
        out.s = std::log(std::pow(theta, params.c_v) / rho) +
                4.0 * params.a_rad / 3.0 * theta * theta * theta / rho;
    } else {
        out.e = out.s = 0.0;
        out.e_defined = out.s_defined = false;
    }
    return out;
}

std::array<double, 2> gibbs_residual(double rho, double theta, double h,
                                     const std::function<double(double, double)>& p_fn,
                                     const std::function<double(double, double)>& e_fn,
                                     const std::function<double(double, double)>& s_fn) {
    if (!(h > 0.0)) throw ParameterError("gibbs_residual: step h must be > 0");
    if (!(rho > 0.0) || !(theta > 0.0))
        throw DomainError("gibbs_residual: rho, theta must be > 0");
    if (h >= rho || h >= theta)
        throw ParameterError("gibbs_residual: step h must be << min(rho, theta)");

    auto dtheta = [&](const std::function<double(double, double)>& f) {
        return (f(rho, theta + h) - f(rho, theta - h)) / (2.0 * h);
    };
    auto drho = [&](const std::function<double(double, double)>& f) {
        return (f(rho + h, theta) - f(rho - h, theta)) / (2.0 * h);
    };

    const double r_theta = theta * dtheta(s_fn) - dtheta(e_fn);
    // d(1/rho)/drho by the same central difference as the other partials
    const double dinv = (1.0 / (rho + h) - 1.0 / (rho - h)) / (2.0 * h);
    const double r_rho = theta * drho(s_fn) - drho(e_fn) - p_fn(rho, theta) * dinv;
    return {r_theta, r_rho};
}

std::array<double, 2> gibbs_residual(double rho, double theta,
                                     const ConstitutiveParams& params, double h) {
    auto p_fn = [&](double r, double t) { return thermo_eval(r, t, params).p; };
    auto e_fn = [&](double r, double t) { return thermo_eval(r, t, params).e; };
    auto s_fn = [&](double r, double t) { return thermo_eval(r, t, params).s; };
    return gibbs_residual(rho, theta, h, p_fn, e_fn, s_fn);
}

TransportEval transport_eval(double theta, const ConstitutiveParams& params) {
    if (!(theta > 0.0)) throw DomainError("transport_eval: theta must be > 0");
    TransportEval out;
    const double th3 = theta * theta * theta;
    out.mu = params.mu0 * (1.0 + theta);
    out.eta = params.eta0 * (1.0 + theta);
    out.kappa = params.kappa0 * (1.0 + th3);
    out.d = params.d_variant == DVariant::TEMP_DEPENDENT
                ? 1.5 * params.d0 * (1.0 + th3)
                : params.d0;
    return out;
}

DissipationEval dissipation_eval(double theta,
                                 const std::array<std::array<double, 3>, 3>& grad_u,
                                 const std::array<double, 3>& grad_theta,
                                 const ConstitutiveParams& params) {
    if (!(theta > 0.0)) throw DomainError("dissipation_eval: theta must be > 0");
    const TransportEval tr = transport_eval(theta, params);

    const double div_u = grad_u[0][0] + grad_u[1][1] + grad_u[2][2];
    DissipationEval out;
    double s_contract_gu = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double sij = tr.mu * (grad_u[i][j] + grad_u[j][i]);
            if (i == j) sij += (tr.eta - 2.0 / 3.0 * tr.mu) * div_u;
            out.stress[i][j] = sij;
            s_contract_gu += sij * grad_u[i][j];
        }
    }
    const double gt2 = grad_theta[0] * grad_theta[0] + grad_theta[1] * grad_theta[1] +
                       grad_theta[2] * grad_theta[2];
    out.sigma_density = (s_contract_gu + tr.kappa * gt2 / theta) / theta;
    return out;
}

} // namespace nsfp
