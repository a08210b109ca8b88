#pragma once

#include <cmath>
#include <stdexcept>

namespace blowup {

// Volume of the unit k-sphere S^k embedded in R^{k+1}.
inline double sphere_volume(int k) {
    if (k < 0) throw std::invalid_argument("sphere_volume: k < 0");
    return 2.0 * std::pow(M_PI, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

// Critical Sobolev exponent 2n/(n-2).
inline double crit_exp(int n) { return 2.0 * n / (n - 2.0); }

// Best Sobolev constant K_n, with K_n^{-n} the Dirichlet energy of the
// standard bubble (1 + |y|^2/(n(n-2)))^{1-n/2}.
inline double sobolev_Kn(int n) {
    return std::sqrt(4.0 / (n * (n - 2.0) * std::pow(sphere_volume(n), 2.0 / n)));
}

inline double sobolev_Kn_pow_minus_n(int n) {
    return std::pow(n * (n - 2.0) / 4.0, 0.5 * n) * sphere_volume(n);
}

// Far-field constant of the Kelvin response to a bubble source,
// K(n) = n^{(n+2)/2} (n-2)^{n/2} w_n / (2^{n+1} (n-1) w_{n-1}).
// Identically equal to n K_n^{-n} / (2 (n-1) w_{n-1}).
inline double kelvin_Kn(int n) {
    return std::pow(double(n), 0.5 * (n + 2)) * std::pow(n - 2.0, 0.5 * n) *
           sphere_volume(n) / (std::pow(2.0, n + 1) * (n - 1) * sphere_volume(n - 1));
}

}  // namespace blowup
