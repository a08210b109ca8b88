#pragma once

#include <functional>
#include <vector>

#include "blowup/errors.hpp"
#include "blowup/special.hpp"

namespace blowup {

struct QuadratureSpec {
    double rel_tol = 1e-9;
    std::vector<double> r_split;  // extra panel boundaries in r
    int angular_moment = 0;       // power of |<zeta, yhat>| in the integrand: 0 or 2
    int max_depth = 36;
};

// Integral over R^n of fn(|y|) times the angular factor, reduced to
// w_{n-1} <ang> int_0^inf fn(r) r^{n-1} dr with <|cos|^2> = 1/n.
// The tail is compactified through r = s/(1-s).
double radial_integral(const std::function<double(double)>& fn, int n,
                       const QuadratureSpec& spec = {});

// One-dimensional adaptive integral on (a,b), same engine.
double integrate_1d(const std::function<double(double)>& fn, double a, double b,
                    double rel_tol = 1e-10, int max_depth = 36);

struct BubbleEnergy {
    double dirichlet = 0.0;   // int |grad U_f|^2
    double mass2star = 0.0;   // int f U_f^{2*}
};

BubbleEnergy bubble_energy(int n, double f_val);

// Gram matrix G_ij = int <grad V_i, grad V_j> over R^n. Off-diagonal
// entries vanish by parity / angular orthogonality and are returned as
// exact zeros; diagonals by quadrature.
std::vector<std::vector<double>> gram_V(int n, double f_val);

struct KappaParams {
    double f0 = 1.0;
    double u0 = 0.0;
    double rho_at_center = 0.0;  // (|L_g T + sigma|^2 + pi^2)(xi_0)
    double alpha = 0.0;
    // C(6) of the coupling term; paper value 2^32 3^9 5^-4.
    double C6 = 4294967296.0 * 19683.0 / 625.0;
};

// Six-dimensional balance constant: positive-energy integral minus the
// coupling-field Kelvin energy, strictly decreasing in alpha^2.
double kappa(const KappaParams& p, const QuadratureSpec& spec = {});

// The unique alpha* > 0 with kappa(alpha*) = 0.
double critical_alpha(const KappaParams& p, const QuadratureSpec& spec = {});

// Numerical constant of the I_{3,i} leading term, computed once by
// quadrature of the defining integral and cached per dimension.
// Closed form (n(n-2))^{n/2} w_{n-1}; the quadrature route is primary.
double I3i_constant(int n);

}  // namespace blowup
