#include "blowup/profiles.hpp"

#include <cmath>

namespace blowup {

namespace {

double norm2(const std::vector<double>& y) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return s;
}

double dist_to_center(const BubbleParams& p, const std::vector<double>& x) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - (i < p.center.size() ? p.center[i] : 0.0);
        s += d * d;
    }
    return std::sqrt(s);
}

// A = delta^2 + c d^2 and derivatives of powers of A
struct Apow {
    double A, dA, d2A;  // A, A', A'' in d
    Apow(const BubbleParams& p, double d) {
        const double c = p.curv();
        A = p.delta() * p.delta() + c * d * d;
        dA = 2.0 * c * d;
        d2A = 2.0 * c;
    }
};

}  // namespace

double standard_bubble_U(double f_val, int n, const std::vector<double>& y) {
    if (!(f_val > 0.0)) throw ConfigError("standard_bubble_U: f must be positive");
    return std::pow(1.0 + f_val * norm2(y) / (n * (n - 2.0)), 1.0 - 0.5 * n);
}

double kernel_V(int i, double f_val, int n, const std::vector<double>& y) {
    if (!(f_val > 0.0)) throw ConfigError("kernel_V: f must be positive");
    if (i < 0 || i > n) throw ConfigError("kernel_V: index out of range");
    const double q = f_val * norm2(y) / (n * (n - 2.0));
    if (i == 0) return (q - 1.0) * std::pow(1.0 + q, -0.5 * n);
    return f_val * y[i - 1] * std::pow(1.0 + q, -0.5 * n);
}

double bubble_pure(const BubbleParams& p, double d) {
    Apow a(p, d);
    return std::pow(p.delta(), 0.5 * (p.n - 2)) * std::pow(a.A, 1.0 - 0.5 * p.n);
}

double bubble_pure_d1(const BubbleParams& p, double d) {
    Apow a(p, d);
    const double e = 1.0 - 0.5 * p.n;
    return std::pow(p.delta(), 0.5 * (p.n - 2)) * e * std::pow(a.A, e - 1.0) * a.dA;
}

namespace {

// z0(d) = delta^{(n-2)/2} A^{-n/2} (c d^2 - delta^2)
double z0_raw(const BubbleParams& p, double d, int deriv) {
    Apow a(p, d);
    const double c = p.curv(), dl = p.delta();
    const double pref = std::pow(dl, 0.5 * (p.n - 2));
    const double e = -0.5 * p.n;
    const double P = c * d * d - dl * dl, dP = 2.0 * c * d, d2P = 2.0 * c;
    const double Ae = std::pow(a.A, e);
    if (deriv == 0) return pref * Ae * P;
    const double Ae1 = e * std::pow(a.A, e - 1.0);
    if (deriv == 1) return pref * (Ae1 * a.dA * P + Ae * dP);
    const double Ae2 = e * (e - 1.0) * std::pow(a.A, e - 2.0);
    return pref * (Ae2 * a.dA * a.dA * P + Ae1 * a.d2A * P + 2.0 * Ae1 * a.dA * dP + Ae * d2P);
}

// z1(d) = f delta^{n/2} A^{-n/2} d  (coefficient of the l=1 harmonic)
double z1_raw(const BubbleParams& p, double d, int deriv) {
    Apow a(p, d);
    const double pref = p.f_center * std::pow(p.delta(), 0.5 * p.n);
    const double e = -0.5 * p.n;
    const double Ae = std::pow(a.A, e);
    if (deriv == 0) return pref * Ae * d;
    const double Ae1 = e * std::pow(a.A, e - 1.0);
    if (deriv == 1) return pref * (Ae1 * a.dA * d + Ae);
    const double Ae2 = e * (e - 1.0) * std::pow(a.A, e - 2.0);
    return pref * (Ae2 * a.dA * a.dA * d + Ae1 * a.d2A * d + 2.0 * Ae1 * a.dA);
}

struct Cut {
    double v, d1, d2;
    Cut(const BubbleParams& p, double d) {
        ProfileVal c = plateau_chi(d / p.r_cut);
        v = c.v;
        d1 = c.d1 / p.r_cut;
        d2 = c.d2 / (p.r_cut * p.r_cut);
    }
};

// geometric Laplacian of a cutoff product chi(d) q(d) on mode l, given the
// pure-profile Laplacian lap_q = (L_l q)(d):
//   L_l(chi q) = chi L_l q - chi'' q - 2 chi' q' - (n-1) chi' q / d
double cutoff_lap(const BubbleParams& p, double d, double q, double dq, double lap_q,
                  const Cut& c) {
    return c.v * lap_q - c.d2 * q - 2.0 * c.d1 * dq - (p.n - 1.0) * c.d1 * q / d;
}

}  // namespace

double bubble_W(const BubbleParams& p, double d) {
    if (d >= 2.0 * p.r_cut) return 0.0;
    return plateau_chi(d / p.r_cut).v * bubble_pure(p, d);
}

double bubble_W_d1(const BubbleParams& p, double d) {
    if (d >= 2.0 * p.r_cut) return 0.0;
    Cut c(p, d);
    return c.v * bubble_pure_d1(p, d) + c.d1 * bubble_pure(p, d);
}

double bubble_W_lap(const BubbleParams& p, double d) {
    if (d >= 2.0 * p.r_cut) return 0.0;
    const double pcrit = crit_exp(p.n);
    // exact identity for the pure bubble: Delta B = f(xi) B^{2*-1}
    const double lapB = p.f_center * std::pow(bubble_pure(p, d), pcrit - 1.0);
    if (d <= p.r_cut) return lapB;
    Cut c(p, d);
    return cutoff_lap(p, d, bubble_pure(p, d), bubble_pure_d1(p, d), lapB, c);
}

double kernel_Z0(const BubbleParams& p, double d) {
    if (d >= 2.0 * p.r_cut) return 0.0;
    return plateau_chi(d / p.r_cut).v * z0_raw(p, d, 0);
}

double kernel_Z0_d1(const BubbleParams& p, double d) {
    if (d >= 2.0 * p.r_cut) return 0.0;
    Cut c(p, d);
    return c.v * z0_raw(p, d, 1) + c.d1 * z0_raw(p, d, 0);
}

double kernel_Z0_lap(const BubbleParams& p, double d) {
    if (d >= 2.0 * p.r_cut) return 0.0;
    const double pcrit = crit_exp(p.n);
    const double lapz = (pcrit - 1.0) * p.f_center *
                        std::pow(bubble_pure(p, d), pcrit - 2.0) * z0_raw(p, d, 0);
    if (d <= p.r_cut) return lapz;
    Cut c(p, d);
    return cutoff_lap(p, d, z0_raw(p, d, 0), z0_raw(p, d, 1), lapz, c);
}

double kernel_Z1(const BubbleParams& p, double d) {
    if (d >= 2.0 * p.r_cut) return 0.0;
    return plateau_chi(d / p.r_cut).v * z1_raw(p, d, 0);
}

double kernel_Z1_d1(const BubbleParams& p, double d) {
    if (d >= 2.0 * p.r_cut) return 0.0;
    Cut c(p, d);
    return c.v * z1_raw(p, d, 1) + c.d1 * z1_raw(p, d, 0);
}

double kernel_Z1_lap(const BubbleParams& p, double d) {
    if (d >= 2.0 * p.r_cut) return 0.0;
    const double pcrit = crit_exp(p.n);
    const double lapz = (pcrit - 1.0) * p.f_center *
                        std::pow(bubble_pure(p, d), pcrit - 2.0) * z1_raw(p, d, 0);
    if (d <= p.r_cut) return lapz;
    Cut c(p, d);
    return cutoff_lap(p, d, z1_raw(p, d, 0), z1_raw(p, d, 1), lapz, c);
}

double bubble(const BubbleParams& p, const std::vector<double>& x) {
    p.validate();
    return bubble_W(p, dist_to_center(p, x));
}

double kernel_Z(int i, const BubbleParams& p, const std::vector<double>& x) {
    p.validate();
    if (i < 0 || i > p.n) throw ConfigError("kernel_Z: index out of range");
    const double d = dist_to_center(p, x);
    if (i == 0) return kernel_Z0(p, d);
    if (d == 0.0) return 0.0;
    const double zi = x[i - 1] - (static_cast<size_t>(i - 1) < p.center.size() ? p.center[i - 1] : 0.0);
    return kernel_Z1(p, d) * zi / d;
}

double bubble_residual(const BubbleParams& p, const ModelConfig& cfg,
                       const std::vector<double>& x) {
    (void)cfg;  // flat model: the h terms cancel identically
    p.validate();
    const double d = dist_to_center(p, x);
    if (d >= 2.0 * p.r_cut) return 0.0;
    const double pcrit = crit_exp(p.n);
    const double W = bubble_W(p, d);
    // (Delta + h) W - f(xi) W^{2*-1} - (h - c_n S_g) W; flat model S_g = 0
    // and the h terms cancel, leaving the cutoff commutator.
    return bubble_W_lap(p, d) - p.f_center * std::pow(W, pcrit - 1.0);
}

}  // namespace blowup
