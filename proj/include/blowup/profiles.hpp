#pragma once

#include <vector>

#include "blowup/bumps.hpp"
#include "blowup/errors.hpp"
#include "blowup/model.hpp"

namespace blowup {

// Parameters of one cutoff bubble centered at xi with concentration
// delta = mu t and frozen focusing constant f(xi).
struct BubbleParams {
    double t = 1.0;
    double mu = 0.0;
    std::vector<double> center;
    double f_center = 1.0;
    double r_cut = 0.0;
    int n = 0;

    double delta() const { return mu * t; }
    double curv() const { return f_center / (n * (n - 2.0)); }  // c = f/(n(n-2))
    void validate() const {
        if (!(delta() > 0.0)) throw ConfigError("BubbleParams: delta must be positive");
        if (!(r_cut > std::sqrt(delta()))) throw ConfigError("BubbleParams: r_cut too small");
    }
};

// theta(x) = delta + |x - xi|
inline double theta_weight(const BubbleParams& p, double d) { return p.delta() + d; }

// Standard bubble U(y) = (1 + f |y|^2 / (n(n-2)))^{1-n/2}.
double standard_bubble_U(double f_val, int n, const std::vector<double>& y);

// Kernel functions V_i of the linearized equation, i = 0..n.
double kernel_V(int i, double f_val, int n, const std::vector<double>& y);

// --- radial profiles about the bubble center (d = distance to center) ---

// pure bubble B(d) and the cutoff bubble W(d) = chi(d/r_cut) B(d)
double bubble_pure(const BubbleParams& p, double d);
double bubble_pure_d1(const BubbleParams& p, double d);
double bubble_W(const BubbleParams& p, double d);
double bubble_W_d1(const BubbleParams& p, double d);
// geometric Laplacian of W as an l=0 radial field (analytic, cutoff included)
double bubble_W_lap(const BubbleParams& p, double d);

// kernel profiles: Z_0 (l=0) and the common l=1 coefficient of Z_i
double kernel_Z0(const BubbleParams& p, double d);
double kernel_Z0_d1(const BubbleParams& p, double d);
double kernel_Z0_lap(const BubbleParams& p, double d);
double kernel_Z1(const BubbleParams& p, double d);
double kernel_Z1_d1(const BubbleParams& p, double d);
double kernel_Z1_lap(const BubbleParams& p, double d);  // l=1 radial operator

// full-space evaluators
double bubble(const BubbleParams& p, const std::vector<double>& x);
double kernel_Z(int i, const BubbleParams& p, const std::vector<double>& x);

// Pointwise residual (Delta + h) W - f(xi) W^{2*-1} - (h - c_n S_g) W of
// the cutoff bubble; zero inside the plateau, O(delta^{(n-2)/2} r_cut^{-n})
// on the annulus.
double bubble_residual(const BubbleParams& p, const ModelConfig& cfg, const std::vector<double>& x);

}  // namespace blowup
