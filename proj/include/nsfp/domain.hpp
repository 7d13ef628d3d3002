#pragma once

#include <array>
#include <cmath>
#include <string>

#include "nsfp/errors.hpp"

namespace nsfp {

/// Time-periodic body force, evaluated as a closure. The trig preset is
///   f = A ( sin(2 pi t/L) sin(pi x1/l1), cos(2 pi t/L) sin(pi x2/l2), 0 )
/// whose Euclidean sup-norm equals exactly A.
struct ForcingSpec {
    enum class Kind { ZERO, TRIG };
    Kind kind = Kind::ZERO;
    double amplitude = 0.0;

    std::array<double, 3> operator()(double t, const std::array<double, 3>& x,
                                     double period_L, const std::array<double, 3>& box) const {
        if (kind == Kind::ZERO || amplitude == 0.0) return {0.0, 0.0, 0.0};
        const double w = 2.0 * M_PI / period_L;
        return {amplitude * std::sin(w * t) * std::sin(M_PI * x[0] / box[0]),
                amplitude * std::cos(w * t) * std::sin(M_PI * x[1] / box[1]), 0.0};
    }
};

/// Space-time domain S^1 x Omega with Omega an axis-aligned box, plus the
/// problem data tied to it: total mass, boundary temperature, forcing.
struct DomainSpec {
    double period_L = 1.0;
    std::array<double, 3> box = {1.0, 1.0, 1.0};
    double M0 = 1.0;           ///< total mass, > 0
    double theta0 = 1.0;       ///< constant boundary temperature, > 0
    ForcingSpec force;

    double volume() const { return box[0] * box[1] * box[2]; }
    double mean_density() const { return M0 / volume(); }

    void validate() const {
        if (!(period_L > 0.0)) throw ParameterError("domain: period_L must be > 0");
        for (double l : box)
            if (!(l > 0.0)) throw ParameterError("domain: box edges must be > 0");
        if (!(M0 > 0.0)) throw ParameterError("domain: M0 must be > 0");
        if (!(theta0 > 0.0)) throw ParameterError("domain: theta0 must be > 0");
    }
};

} // namespace nsfp
