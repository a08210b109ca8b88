#pragma once

#include <cmath>

namespace blowup {

// Smooth compactly supported profiles used for the coefficient bumps.
// All take the scaled radial argument s >= 0 and return value plus
// derivatives in s.

struct ProfileVal {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

// H(y) = (1 - |y|^2)^4 on |y| <= 1, 0 outside. H(0) = 1, grad H(0) = 0,
// Hess H(0) = -8 Id, so 0 is a non-degenerate critical point.
inline ProfileVal bump_H(double s) {
    ProfileVal out;
    if (s >= 1.0) return out;
    const double q = 1.0 - s * s;
    out.v = q * q * q * q;
    out.d1 = -8.0 * s * q * q * q;
    out.d2 = -8.0 * q * q * q + 48.0 * s * s * q * q;
    return out;
}

// Plateau cutoff: 1 on [0,1], 0 on [2,inf), C^3 transition on (1,2)
// via the 7th order smoothstep 35t^4 - 84t^5 + 70t^6 - 20t^7.
inline ProfileVal plateau_chi(double s) {
    ProfileVal out;
    if (s <= 1.0) {
        out.v = 1.0;
        return out;
    }
    if (s >= 2.0) return out;
    const double t = s - 1.0;
    const double t2 = t * t, t3 = t2 * t;
    const double S = t3 * t * (35.0 - 84.0 * t + 70.0 * t2 - 20.0 * t3);
    const double S1 = t3 * (140.0 - 420.0 * t + 420.0 * t2 - 140.0 * t3);
    const double S2 = t2 * (420.0 - 1680.0 * t + 2100.0 * t2 - 840.0 * t3);
    out.v = 1.0 - S;
    out.d1 = -S1;
    out.d2 = -S2;
    return out;
}

// Radial profile of the coupling 1-form Z: same shape as H, so that
// |Z(0)| = 1 and Z is supported in the unit ball.
inline ProfileVal bump_zdir(double s) { return bump_H(s); }

}  // namespace blowup
