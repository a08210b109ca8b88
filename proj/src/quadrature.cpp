#include "blowup/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace blowup {

namespace {

// 15-point Gauss-Legendre nodes/weights on (-1,1).
constexpr int kGn = 15;
constexpr double kGx[kGn] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272, -0.7244177313601701,
    -0.5709721726085388, -0.3941513470775634, -0.2011940939974345, 0.0,
    0.2011940939974345,  0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kGw[kGn] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719, 0.1395706779261543,
    0.1662692058169939, 0.1861610000155622, 0.1984314853271116, 0.2025782419255613,
    0.1984314853271116, 0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

double gauss15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < kGn; ++i) s += kGw[i] * f(c + h * kGx[i]);
    return s * h;
}

struct AdaptiveCtx {
    const std::function<double(double)>* f;
    double tol_abs;
    int max_depth;
};

double adapt(const AdaptiveCtx& ctx, double a, double b, double whole, int depth) {
    const double m = 0.5 * (a + b);
    const double left = gauss15(*ctx.f, a, m);
    const double right = gauss15(*ctx.f, m, b);
    const double err = std::abs(left + right - whole);
    if (err < ctx.tol_abs) return left + right;
    if (depth >= ctx.max_depth)
        throw NumericalError("adaptive quadrature failed to converge (decay precondition?)");
    return adapt(ctx, a, m, left, depth + 1) + adapt(ctx, m, b, right, depth + 1);
}

double integrate_panels(const std::function<double(double)>& f, std::vector<double> knots,
                        double rel_tol, int max_depth) {
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    // first pass to estimate the scale
    double rough = 0.0;
    std::vector<double> panel(knots.size() - 1);
    for (size_t i = 0; i + 1 < knots.size(); ++i) {
        panel[i] = gauss15(f, knots[i], knots[i + 1]);
        rough += std::abs(panel[i]);
    }
    AdaptiveCtx ctx{&f, std::max(rough, 1e-300) * rel_tol, max_depth};
    double total = 0.0;
    for (size_t i = 0; i + 1 < knots.size(); ++i)
        total += adapt(ctx, knots[i], knots[i + 1], panel[i], 0);
    return total;
}

}  // namespace

double integrate_1d(const std::function<double(double)>& fn, double a, double b, double rel_tol,
                    int max_depth) {
    return integrate_panels(fn, {a, 0.5 * (a + b), b}, rel_tol, max_depth);
}

double radial_integral(const std::function<double(double)>& fn, int n, const QuadratureSpec& spec) {
    if (!(spec.rel_tol > 0.0)) throw ConfigError("radial_integral: rel_tol must be positive");
    if (spec.angular_moment != 0 && spec.angular_moment != 2)
        throw ConfigError("radial_integral: angular_moment must be 0 or 2");
    // r = s/(1-s), dr = ds/(1-s)^2
    auto g = [&](double s) {
        const double oms = 1.0 - s;
        const double r = s / oms;
        return fn(r) * std::pow(r, n - 1) / (oms * oms);
    };
    std::vector<double> knots{0.0, 0.125, 0.25, 0.5, 0.75, 0.875, 1.0};
    for (double r : spec.r_split)
        if (r > 0.0) knots.push_back(r / (1.0 + r));
    const double radial = integrate_panels(g, knots, spec.rel_tol, spec.max_depth);
    const double ang = spec.angular_moment == 0 ? 1.0 : 1.0 / n;
    return sphere_volume(n - 1) * ang * radial;
}

BubbleEnergy bubble_energy(int n, double f_val) {
    if (!(f_val > 0.0)) throw ConfigError("bubble_energy: f must be positive");
    const double c = f_val / (n * (n - 2.0));
    auto dU = [&](double r) {
        return (1.0 - 0.5 * n) * 2.0 * c * r * std::pow(1.0 + c * r * r, -0.5 * n);
    };
    auto U2s = [&](double r) {
        return f_val * std::pow(1.0 + c * r * r, -double(n));
    };
    BubbleEnergy out;
    out.dirichlet = radial_integral([&](double r) { return dU(r) * dU(r); }, n);
    out.mass2star = radial_integral(U2s, n);
    return out;
}

std::vector<std::vector<double>> gram_V(int n, double f_val) {
    if (!(f_val > 0.0)) throw ConfigError("gram_V: f must be positive");
    const double c = f_val / (n * (n - 2.0));
    // V_0 radial; V_i = q(r) (x_i / r) with q = f r (1+c r^2)^{-n/2}.
    auto dV0 = [&](double r) {
        const double A = 1.0 + c * r * r;
        return 2.0 * c * r * std::pow(A, -0.5 * n) +
               (c * r * r - 1.0) * (-0.5 * n) * 2.0 * c * r * std::pow(A, -0.5 * n - 1.0);
    };
    auto q = [&](double r) { return f_val * r * std::pow(1.0 + c * r * r, -0.5 * n); };
    auto dq = [&](double r) {
        const double A = 1.0 + c * r * r;
        return f_val * std::pow(A, -0.5 * n) +
               f_val * r * (-0.5 * n) * 2.0 * c * r * std::pow(A, -0.5 * n - 1.0);
    };
    const double g00 = radial_integral([&](double r) { return dV0(r) * dV0(r); }, n);
    // |grad (q (x_i/r))|^2 integrated: q'^2 <cos^2> + q^2 (1 - <cos^2>)/r^2
    const double gii = radial_integral(
        [&](double r) {
            return dq(r) * dq(r) / n + q(r) * q(r) * (1.0 - 1.0 / n) / (r * r);
        },
        n);
    std::vector<std::vector<double>> G(n + 1, std::vector<double>(n + 1, 0.0));
    G[0][0] = g00;
    for (int i = 1; i <= n; ++i) G[i][i] = gii;
    // off-diagonals vanish by parity (0,i) and angular orthogonality (i,j)
    return G;
}

namespace {

// kappa = (24^2/f) rho_c I_A - C6 f^{-8} alpha^2 I_B with
//   I_A = int_{R^6} [u0^-4 - (u0 + cbar r^-4)^-4] r^-4 dy
//   I_B = int_{R^6} (u0 + cbar r^-4)^-4 (2 + 28 cos^2) r^-14 dy
double kappa_IA(const KappaParams& p, const QuadratureSpec& spec) {
    const double cbar = std::pow(24.0 / p.f0, 2);
    QuadratureSpec s = spec;
    s.angular_moment = 0;
    // peak scale of the crossover cbar r^-4 = u0
    const double rstar = std::pow(cbar / p.u0, 0.25);
    s.r_split = {0.25 * rstar, rstar, 4.0 * rstar};
    auto fn = [&](double r) {
        const double w = p.u0 + cbar * std::pow(r, -4.0);
        return (std::pow(p.u0, -4.0) - std::pow(w, -4.0)) * std::pow(r, -4.0);
    };
    return radial_integral(fn, 6, s);
}

double kappa_IB(const KappaParams& p, const QuadratureSpec& spec) {
    const double cbar = std::pow(24.0 / p.f0, 2);
    const double rstar = std::pow(cbar / p.u0, 0.25);
    auto fn = [&](double r) {
        const double w = p.u0 + cbar * std::pow(r, -4.0);
        return std::pow(w, -4.0) * std::pow(r, -14.0);
    };
    QuadratureSpec s0 = spec;
    s0.angular_moment = 0;
    s0.r_split = {0.25 * rstar, rstar, 4.0 * rstar};
    QuadratureSpec s2 = s0;
    s2.angular_moment = 2;
    return 2.0 * radial_integral(fn, 6, s0) + 28.0 * radial_integral(fn, 6, s2);
}

}  // namespace

double kappa(const KappaParams& p, const QuadratureSpec& spec) {
    if (!(p.u0 > 0.0)) throw ConfigError("kappa: u0 must be positive");
    if (!(p.f0 > 0.0)) throw ConfigError("kappa: f0 must be positive");
    const double first = (576.0 / p.f0) * p.rho_at_center * kappa_IA(p, spec);
    const double second = p.C6 * std::pow(p.f0, -8.0) * p.alpha * p.alpha * kappa_IB(p, spec);
    return first - second;
}

double critical_alpha(const KappaParams& p, const QuadratureSpec& spec) {
    const double first = (576.0 / p.f0) * p.rho_at_center * kappa_IA(p, spec);
    if (!(first > 0.0))
        throw RegimeError("critical_alpha: first kappa integral non-positive (invalid background)");
    const double bcoef = p.C6 * std::pow(p.f0, -8.0) * kappa_IB(p, spec);
    return std::sqrt(first / bcoef);
}

double I3i_constant(int n) {
    static std::map<int, double> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    // (2*-1) (1/n) (n(n-2))^{1+n/2} int |y|^2 (1+|y|^2)^{-(n+4)/2} dy
    const double p = crit_exp(n);
    const double J = radial_integral(
        [&](double r) { return r * r * std::pow(1.0 + r * r, -0.5 * (n + 4)); }, n);
    const double C = (p - 1.0) / n * std::pow(n * (n - 2.0), 1.0 + 0.5 * n) * J;
    cache[n] = C;
    return C;
}

}  // namespace blowup
