#include "nsfp/kirchhoff.hpp"

#include <cmath>
#include <limits>

namespace nsfp {

namespace {

constexpr double kLogMax = 700.0; // just below log(DBL_MAX)

double integrand(double z, const KirchhoffSpec& spec) {
    const double th = std::exp(z);
    const double kap = spec.kappa_override ? spec.kappa_override(th)
                                           : spec.kappa0 * (1.0 + th * th * th);
    return kap * th + spec.delta * std::exp((spec.B + 1.0) * z) + spec.delta;
}

// adaptive Simpson on [a,b], relative tolerance on the whole integral
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole,
                            tol * std::max(1.0, std::abs(whole)), 52);
}

} // namespace

void KirchhoffSpec::validate() const {
    if (!(delta > 0.0)) throw ParameterError("kirchhoff: delta must be > 0");
    if (!(B >= 2.0)) throw ParameterError("kirchhoff: B must be >= 2");
    if (!(kappa0 > 0.0)) throw ParameterError("kirchhoff: kappa0 must be > 0");
}

PhiEval phi_eval(double g, const KirchhoffSpec& spec) {
    spec.validate();
    if (!std::isfinite(g)) throw DomainError("phi_eval: g must be finite");
    if ((spec.B + 1.0) * g > kLogMax || 4.0 * g > kLogMax)
        throw DomainError("phi_eval: g beyond representable range");

    PhiEval out;
    out.derivative = integrand(g, spec);
    if (!spec.kappa_override) {
        // kappa(e^z) e^z = kappa0 (e^z + e^{4z})
        const double eg = std::expm1(g);                       // e^g - 1
        const double e4 = std::expm1(4.0 * g);                 // e^{4g} - 1
        const double eb = std::expm1((spec.B + 1.0) * g);      // e^{(B+1)g} - 1
        out.value = spec.kappa0 * (eg + 0.25 * e4) + spec.delta * (eb / (spec.B + 1.0) + g);
    } else {
        auto f = [&](double z) { return integrand(z, spec); };
        out.value = integrate(f, 0.0, g, 1e-12);
    }
    return out;
}

double phi_inverse(double y, const KirchhoffSpec& spec) {
    spec.validate();
    if (!std::isfinite(y)) throw DomainError("phi_inverse: y must be finite");
    if (y == 0.0) return 0.0;

    const double tol = 1e-10 * std::max(1.0, std::abs(y));
    auto value = [&](double g) { return phi_eval(g, spec).value; };

    // Monotonicity and Phi(0) = 0 give rigorous brackets: the root shares the
    // sign of y, Phi(g) >= delta g bounds it from below, and on the positive
    // side Phi dominates the delta e^{(B+1)g}/(B+1) branch.
    const double g_cap = kLogMax / (spec.B + 1.0) - 1e-9;
    double lo, hi;
    if (y <= 0.0) {
        lo = y / spec.delta - 1.0; // Phi(lo) <= delta lo < y
        hi = 0.0;
    } else {
        lo = 0.0;
        hi = std::min({y / spec.delta,
                       std::log(y * (spec.B + 1.0) / spec.delta + 1.0) / (spec.B + 1.0),
                       g_cap}) +
             1.0;
        hi = std::min(hi, g_cap);
    }
    double flo = value(lo) - y, fhi = value(hi) - y;
    double width = std::max(1.0, hi - lo);
    while (flo > 0.0) {
        lo -= width;
        width *= 2.0;
        flo = value(lo) - y;
    }
    while (fhi < 0.0) {
        if (hi >= g_cap) throw DomainError("phi_inverse: y beyond representable range");
        hi = std::min(hi + width, g_cap);
        width *= 2.0;
        fhi = value(hi) - y;
    }

    // safeguarded Newton: fall back to bisection whenever the Newton step
    // leaves the bracket or stops contracting (the exponential branch is too
    // steep for plain Newton started far from the root)
    double g = 0.5 * (lo + hi);
    double dx_old = hi - lo;
    PhiEval pe = phi_eval(g, spec);
    for (int it = 0; it < 300; ++it) {
        const double r = pe.value - y;
        const double g_step = r / pe.derivative;
        if (std::abs(r) <= tol && std::abs(g_step) <= 1e-10 * std::max(1.0, std::abs(g)))
            return g;
        if (r > 0.0) hi = g; else lo = g;
        if (hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() *
                           std::max({std::abs(lo), std::abs(hi), 1.0})) {
            if (std::abs(r) <= 10.0 * tol) return g;
            break;
        }
        const bool newton_ok = (g - g_step > lo) && (g - g_step < hi) &&
                               std::abs(2.0 * r) <= std::abs(dx_old * pe.derivative);
        dx_old = hi - lo;
        g = newton_ok ? g - g_step : 0.5 * (lo + hi);
        pe = phi_eval(g, spec);
    }
    if (std::abs(pe.value - y) <= 10.0 * tol) return g;
    throw SolverError("phi_inverse: did not verify tolerance");
}

} // namespace nsfp
