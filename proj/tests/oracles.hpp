#pragma once

// Closed forms evaluated independently of the library, used as test oracles.

#include <cmath>
#include <complex>

namespace oracle {

using C = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

struct Branch {
    double r, l, c;
};

inline Branch from_specs(double fs, double q, double k2, double c0) {
    const double cm = c0 * (8.0 / (pi * pi)) * k2 / (1.0 - k2);
    const double w = 2.0 * pi * fs;
    const double lm = 1.0 / (w * w * cm);
    return {w * lm / q, lm, cm};
}

inline C branch_z(const Branch& b, double f) {
    const double w = 2.0 * pi * f;
    return C(b.r, w * b.l - 1.0 / (w * b.c));
}

// Reflection of a one-port admittance y against reference z0.
inline C reflection(C y, double z0) { return (1.0 - z0 * y) / (1.0 + z0 * y); }

}  // namespace oracle
