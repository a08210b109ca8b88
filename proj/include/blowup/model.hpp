#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "blowup/bumps.hpp"
#include "blowup/errors.hpp"
#include "blowup/special.hpp"

namespace blowup {

// Problem data: dimension, coefficient bumps, concentration scales.
// The background manifold is R^n with the Euclidean metric on a large
// ball (locally conformally flat model, S_g = 0, Lambda = 1).
struct ModelConfig {
    int n = 7;
    double tau = 1e-3;    // bump amplitude tau_k
    double mu = 0.0;      // concentration scale, derived from tau
    double beta = 0.0;    // h-bump radius
    double r_cut = 0.0;   // cutoff radius of bubbles / f-bump / X-bump
    double f0 = 1.0;      // background focusing constant
    double s_bump = 0.0;  // f-bump amplitude
    double h0 = 0.0;      // background potential constant
    double rho0 = 0.0;    // |sigma|^2 + pi^2 background constant
    double alpha = 0.0;   // |Z(0)|, amplitude of the coupling field
    std::vector<double> zdir;  // unit direction of Z(0), size n
    bool lcf_flag = true;
    double weyl_sq = 0.0;  // |W_g(xi_0)|^2, used only by closed-form evaluators
    double beta_exponent = 0.75;
    double beta_coef = 1.0;
    double rcut_exponent = 4.0;

    double crit() const { return crit_exp(n); }
    // Potential of the operator Delta + h away from the bumps.
    double h_max() const { return n >= 7 ? h0 + tau : h0; }
};

// Strictly stable constant background solution of
//   h0 u = f0 u^{2*-1} + rho0 u^{-2*-1}.
struct GroundState {
    double u0 = 0.0;
    double stability_margin = 0.0;  // -g'(u0) > 0 at the minimal root
    double eps0 = 0.0;              // lower bound of Lemma-type minorization
};

// Pointwise coefficient values at a point x in R^n. `h_bump` is the bump
// part of h; the full operator potential is h0 + h_bump.
struct CoefficientValues {
    double h_bump = 0.0;
    double f = 0.0;
    std::vector<double> grad_f;
    std::vector<double> X;  // coupling 1-form
};

// rho_eps truncation of (defeta)-type: eps if r < eps, else r.
inline double truncate_rho(double eps, double r) { return r < eps ? eps : r; }
inline double truncate_rho_d1(double eps, double r) { return r < eps ? 0.0 : 1.0; }

ModelConfig make_model(const std::map<std::string, double>& raw,
                       const std::vector<double>& zdir = {});

void validate_model(const ModelConfig& cfg);

// g(u) = f0 u^{2*-1} + rho0 u^{-2*-1} - h0 u, whose minimal positive root
// is the stable background.
double background_g(const ModelConfig& cfg, double u);
double background_g_d1(const ModelConfig& cfg, double u);

GroundState solve_ground_state(const ModelConfig& cfg);

CoefficientValues eval_coefficients(const ModelConfig& cfg, const std::vector<double>& x);

// Radial evaluators (all coefficient fields are radial about the origin).
double h_bump_radial(const ModelConfig& cfg, double r);    // +-tau H(r/beta)
double f_radial(const ModelConfig& cfg, double r);         // f0 + s_bump chi(r/r_cut)
double f_radial_d1(const ModelConfig& cfg, double r);
double x_amplitude_radial(const ModelConfig& cfg, double r);  // alpha mu^{(n-1)/2} zprof(r/r_cut)

}  // namespace blowup
