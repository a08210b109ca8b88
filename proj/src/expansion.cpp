#include "blowup/expansion.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace blowup {

namespace {

double bump_coefficient_CW(int n, double f) {
    return 8.0 * (n - 1.0) / ((n - 2.0) * (n - 4.0)) * sobolev_Kn_pow_minus_n(n) *
           std::pow(f, -0.5 * n);
}

double mass_coefficient_B(int n, double f) {
    // int W Z0-type pairing against the background: coefficient of
    // u(xi0) delta^{(n-2)/2}, quadrature-verified form (n-2)(n(n-2))^{(n-2)/2} w_{n-1}
    return (n - 2.0) * std::pow(n * (n - 2.0), 0.5 * (n - 2)) * sphere_volume(n - 1) *
           std::pow(f, 1.0 - 0.5 * n);
}

// cached slope pairing int W (z.e) Z_i / delta^3 at n = 6 scale; general n
double WZ1_slope_constant(int n, double f) {
    // (1/n) w_{n-1} f (n(n-2)/f)^{(n+2)/2} int s^{n+1} (1+s^2)^{1-n} ds
    const double J = integrate_1d(
        [&](double s) { return std::pow(s, n + 1) * std::pow(1.0 + s * s, 1.0 - n); }, 0.0,
        60.0, 1e-11);
    return sphere_volume(n - 1) / n * f * std::pow(n * (n - 2.0) / f, 0.5 * (n + 2)) * J;
}

}  // namespace

LeadingParams make_leading_params(const ModelConfig& cfg, const GroundState& gs,
                                  const BackgroundProfile& bg, double t,
                                  const std::vector<double>& p) {
    (void)gs;  // the profile carries the background values
    LeadingParams lp;
    lp.n = cfg.n;
    lp.t = t;
    lp.mu = cfg.mu;
    lp.tau = cfg.tau;
    lp.beta = cfg.beta;
    double pn = 0.0;
    for (double x : p) pn += x * x;
    pn = std::sqrt(pn);
    const double xi = cfg.beta * pn;
    lp.f_center = f_radial(cfg, xi);
    lp.u_center = bg.value(xi);
    lp.h0 = cfg.h0;
    lp.two_fu_offset = cfg.h0 - 2.0 * lp.f_center * lp.u_center;
    lp.H_p = bump_H(pn).v;
    lp.gradH_p.assign(cfg.n, 0.0);
    lp.grad_u.assign(cfg.n, 0.0);
    if (pn > 0.0) {
        const double dH = bump_H(pn).d1;
        const double du = bg.deriv(xi);
        for (int i = 0; i < cfg.n; ++i) {
            lp.gradH_p[i] = dH * p[i] / pn;
            lp.grad_u[i] = du * p[i] / pn;
        }
    }
    lp.weyl_sq = cfg.weyl_sq;
    lp.lcf = cfg.lcf_flag;
    lp.rho_center = cfg.rho0;
    lp.alpha = cfg.alpha;
    return lp;
}

double leading_term(const std::string& name, const LeadingParams& lp, int axis) {
    const int n = lp.n;
    const double f = lp.f_center, dl = lp.delta();
    if (n >= 7) {
        if (name == "I1_0") {
            double v = bump_coefficient_CW(n, f) * (lp.tau * lp.H_p + lp.h0) * lp.mu * lp.mu *
                       lp.t * lp.t;
            if (!lp.lcf || lp.weyl_sq > 0.0)
                v -= (1.0 / 3.0) * n * (n - 2.0) / ((n - 4.0) * (n - 6.0)) *
                     std::pow(f, -1.0 - 0.5 * n) * sobolev_Kn_pow_minus_n(n) * lp.weyl_sq *
                     std::pow(lp.mu * lp.t, 4.0);
            return v;
        }
        if (name == "I3_0")
            return -mass_coefficient_B(n, f) * lp.u_center * std::pow(dl, 0.5 * (n - 2));
        if (name == "I1_i")
            return 2.0 * n * (n - 1.0) / (n - 4.0) * sobolev_Kn_pow_minus_n(n) *
                   std::pow(f, -0.5 * n) * (lp.tau / lp.beta) * std::pow(lp.mu, 3.0) *
                   std::pow(lp.t, 3.0) * lp.gradH_p[axis];
        if (name == "I3_i")
            return -I3i_constant(n) * std::pow(f, 1.0 - 0.5 * n) * lp.grad_u[axis] *
                   std::pow(dl, 0.5 * n);
        throw ConfigError("leading_term: unknown name " + name);
    }
    // n = 6
    if (name == "J1_0") {
        // int (h - 2 f u) W Z0 - tau-bump part: coefficient 5 K6^-6 f^-3
        const double CW = bump_coefficient_CW(6, f);  // = 5 K6^-6 f^-3
        return CW * (lp.two_fu_offset - lp.tau * lp.H_p) * dl * dl;
    }
    if (name == "J1_i") {
        const double grad_part = -30.0 * sobolev_Kn_pow_minus_n(6) * std::pow(f, -3.0) *
                                 lp.gradH_p[axis] * (lp.tau / lp.beta) * std::pow(dl, 3.0);
        const double slope_part =
            -2.0 * f * lp.grad_u[axis] * WZ1_slope_constant(6, f) * std::pow(dl, 3.0);
        return grad_part + slope_part;
    }
    if (name == "J5_0") {
        const KappaSplit ks = engine_kappa_split(f, lp.u_center, lp.rho_center);
        return ks.rho_part * std::pow(dl, 3.0) -
               ks.coupling_coef * lp.alpha * lp.alpha * std::pow(lp.mu, 3.0) / (lp.t * lp.t);
    }
    throw ConfigError("leading_term: unknown name " + name);
}

KappaSplit engine_kappa_split(double f0, double u0, double rho_center) {
    KappaSplit ks;
    const double cbar = std::pow(24.0 / f0, 2);
    const double rstar = std::pow(cbar / u0, 0.25);
    QuadratureSpec s0;
    s0.angular_moment = 0;
    s0.r_split = {0.25 * rstar, rstar, 4.0 * rstar};
    const double IA = radial_integral(
        [&](double r) {
            const double w = u0 + cbar * std::pow(r, -4.0);
            return (std::pow(u0, -4.0) - std::pow(w, -4.0)) * std::pow(r, -4.0);
        },
        6, s0);
    auto fnB = [&](double r) {
        const double w = u0 + cbar * std::pow(r, -4.0);
        return std::pow(w, -4.0) * std::pow(r, -14.0);
    };
    QuadratureSpec s2 = s0;
    s2.angular_moment = 2;
    const double IB = 2.0 * radial_integral(fnB, 6, s0) + 28.0 * radial_integral(fnB, 6, s2);
    ks.rho_part = 576.0 / (f0 * f0) * rho_center * IA;
    const double K6 = kelvin_Kn(6);
    ks.coupling_coef = 576.0 * K6 * K6 * std::pow(f0, -8.0) * IB;
    return ks;
}

double predicted_b0(const LeadingParams& lp) {
    if (lp.n >= 7) return leading_term("I1_0", lp) + leading_term("I3_0", lp);
    return leading_term("J1_0", lp) + leading_term("J5_0", lp);
}

double predicted_lambda0(const LeadingParams& lp) {
    // normalize by the Dirichlet norm of V_0 at f(xi0)
    auto G = gram_V(lp.n, lp.f_center);
    return predicted_b0(lp) / G[0][0];
}

double predicted_lambda_i_normalized(const LeadingParams& lp, int axis) {
    auto G = gram_V(lp.n, lp.f_center);
    double b;
    if (lp.n >= 7) b = leading_term("I1_i", lp, axis) + leading_term("I3_i", lp, axis);
    else b = leading_term("J1_i", lp, axis);
    return b * lp.beta / std::pow(lp.mu, 0.5 * lp.n) / G[1][1];
}

std::map<std::string, double> numeric_integrals(const Reducer& red, const ReductionState& st) {
    const auto& g = red.grid();
    const auto& rule = red.rule();
    const ModelConfig& cfg = red.config();
    const int n = cfg.n;
    const double p = cfg.crit();
    const double fxi = red.bubble_params().f_center;
    const double eps_tr = red.ground().eps0 / 4.0;
    const int nb = red.basis_size();
    const int K = rule.size();

    // integrand accumulators per basis element
    std::map<std::string, std::vector<double>> acc;
    auto add = [&](const std::string& name, int j, double v) {
        auto& vec = acc[name];
        if (vec.empty()) vec.assign(nb, 0.0);
        vec[j] += v;
    };

    const BubbleParams& bp = red.bubble_params();
    for (int i = 0; i <= g.N; ++i) {
        const double r = g.r[i];
        const double W = red.W()[i];
        const double Wlap = red.W_lap()[i];
        const double z0lap = kernel_Z0_lap(bp, r);
        const double z1lap = kernel_Z1_lap(bp, r);
        for (int k = 0; k < K; ++k) {
            const double wq = g.wq[i] * rule.w[k];
            const double h = red.coeff_h(i, k);
            const double f = red.coeff_f(i, k);
            const double ub = red.ubgW(i, k) - W;  // background value
            const double U = red.ubgW(i, k);
            const double ph = st.phi.eval(i, rule.x[k]);
            const double uk = U + ph;
            const double lt2 =
                red.coupling_field() ? red.coupling_field()->frob2(i, rule.x[k]) : 0.0;
            for (int j = 0; j < nb; ++j) {
                const double Zj = red.basis(j).eval(i, rule.x[k]);
                if (Zj == 0.0) continue;
                // Laplacian of the basis element at this node: the radial
                // coefficient times the angular harmonic
                const double lapZj = (j == 0) ? z0lap : z1lap * rule.x[k][j - 1];
                if (n >= 7) {
                    const double i1 = Wlap + h * W - fxi * std::pow(W, p - 1.0) +
                                      (fxi - f) * std::pow(W, p - 1.0);
                    add("I1", j, wq * i1 * Zj);
                    const double i2 = -f * (std::pow(uk, p - 1.0) - std::pow(U, p - 1.0) -
                                            (p - 1.0) * std::pow(U, p - 2.0) * ph);
                    add("I2", j, wq * i2 * Zj);
                    const double i3 = -f * (std::pow(U, p - 1.0) - std::pow(ub, p - 1.0) -
                                            std::pow(W, p - 1.0));
                    add("I3", j, wq * i3 * Zj);
                    add("I4", j,
                        wq * (lapZj + h * Zj - (p - 1.0) * fxi * std::pow(W, p - 2.0) * Zj) * ph);
                    const double i5 = -(p - 1.0) * f *
                                      (std::pow(U, p - 2.0) - std::pow(W, p - 2.0)) * ph;
                    add("I5", j, wq * i5 * Zj);
                    const double i6 = (p - 1.0) * (fxi - f) * std::pow(W, p - 2.0) * ph;
                    add("I6", j, wq * i6 * Zj);
                    const double i7 = cfg.rho0 * std::pow(ub, -p - 1.0) -
                                      (cfg.rho0 + lt2) * std::pow(uk, -p - 1.0);
                    add("I7", j, wq * i7 * Zj);
                } else {
                    const double j1 = Wlap + (h - 2.0 * f * ub) * W - fxi * W * W +
                                      (fxi - f) * W * W;
                    add("J1", j, wq * j1 * Zj);
                    add("J2", j, wq * f * ph * ph * Zj);
                    add("J3", j,
                        wq * (lapZj + (h - 2.0 * f * ub) * Zj - 2.0 * fxi * W * Zj) * ph);
                    add("J4", j, wq * 2.0 * (fxi - f) * W * ph * Zj);
                    const double j5 = cfg.rho0 * std::pow(ub, -4.0) -
                                      (cfg.rho0 + lt2) * std::pow(uk, -4.0);
                    add("J5", j, wq * j5 * Zj);
                }
            }
        }
    }
    std::map<std::string, double> out;
    for (auto& [name, vec] : acc) {
        out[name + "_0"] = vec[0];
        for (int a = 1; a < nb; ++a) out[name + "_a" + std::to_string(a)] = vec[a];
    }
    // truncation guard: values used the untruncated powers; record eps level
    out["eps_trunc"] = eps_tr;
    return out;
}

std::vector<double> reduced_map_F(const LeadingParams& lp, double t, const std::vector<double>& p,
                                  const ModelConfig& cfg) {
    const int n = lp.n;
    std::vector<double> F(n + 1, 0.0);
    double pn = 0.0;
    for (double x : p) pn += x * x;
    pn = std::sqrt(pn);
    const double Hp = bump_H(pn).v;
    const double dHp = bump_H(pn).d1;
    const double f = lp.f_center;
    if (n == 6) {
        // -5 K6^-6 f^-3 H(p) t^2 + kappa t^3 (+ flat-model offset term)
        KappaParams kp;
        kp.f0 = f;
        kp.u0 = lp.u_center;
        kp.rho_at_center = lp.rho_center;
        kp.alpha = lp.alpha;
        const double kap = kappa(kp);
        F[0] = -5.0 * sobolev_Kn_pow_minus_n(6) * std::pow(f, -3.0) * Hp * t * t +
               kap * t * t * t +
               5.0 * sobolev_Kn_pow_minus_n(6) * std::pow(f, -3.0) * lp.two_fu_offset / lp.tau *
                   t * t;
        for (int i = 0; i < n; ++i) {
            const double gH = pn > 0.0 ? dHp * p[i] / pn : 0.0;
            F[i + 1] = -30.0 * sobolev_Kn_pow_minus_n(6) * std::pow(f, -3.0) * gH * t * t * t;
        }
        return F;
    }
    // rows normalized by mu^{(n-2)/2} = tau mu^2 (sequence law)
    const double CW = bump_coefficient_CW(n, f);
    F[0] = CW * (Hp + lp.h0 / lp.tau) * t * t -
           mass_coefficient_B(n, f) * lp.u_center * std::pow(t, 0.5 * (n - 2));
    if (lp.weyl_sq > 0.0)
        F[0] -= (1.0 / 3.0) * n * (n - 2.0) / ((n - 4.0) * (n - 6.0)) *
                std::pow(f, -1.0 - 0.5 * n) * sobolev_Kn_pow_minus_n(n) * lp.weyl_sq *
                std::pow(t, 4.0) * std::pow(lp.mu, 4.0) / (lp.tau * lp.mu * lp.mu);
    for (int i = 0; i < n; ++i) {
        const double gH = pn > 0.0 ? dHp * p[i] / pn : 0.0;
        F[i + 1] = 2.0 * n * (n - 1.0) / (n - 4.0) * sobolev_Kn_pow_minus_n(n) *
                   std::pow(f, -0.5 * n) * gH * t * t * t;
    }
    (void)cfg;
    return F;
}

double solve_t0(const LeadingParams& lp, double kappa_value) {
    const int n = lp.n;
    const double f = lp.f_center;
    if (n == 6) {
        if (!(kappa_value > 0.0))
            throw RegimeError("kappa non-positive: no admissible t0 at n=6 (alpha too large)");
        const double lhs = 5.0 * sobolev_Kn_pow_minus_n(6) * std::pow(f, -3.0) * lp.H_p;
        const double closed = lhs / kappa_value;
        // bisection confirmation of the same balance
        auto bal = [&](double t) { return lhs * t * t - kappa_value * t * t * t; };
        double lo = 0.5 * closed, hi = 2.0 * closed;
        if (!(bal(lo) > 0.0 && bal(hi) < 0.0))
            throw NumericalError("solve_t0: bracket failure at n=6");
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (bal(mid) > 0.0 ? lo : hi) = mid;
        }
        const double root = 0.5 * (lo + hi);
        if (std::abs(root - closed) > 1e-12 * std::max(1.0, closed))
            throw NumericalError("solve_t0: bisection does not match the closed form");
        return root;
    }
    // n >= 7: CW (H + h0/tau) t^2 = B u t^{(n-2)/2} (+ Weyl terms)
    const double a = bump_coefficient_CW(n, f) * (lp.H_p + lp.h0 / lp.tau);
    const double b = mass_coefficient_B(n, f) * lp.u_center;
    if (!(a > 0.0 && b > 0.0)) throw RegimeError("solve_t0: balance coefficients not positive");
    auto bal = [&](double t) {
        double v = a * t * t - b * std::pow(t, 0.5 * (n - 2));
        if (lp.weyl_sq > 0.0)
            v -= (1.0 / 3.0) * n * (n - 2.0) / ((n - 4.0) * (n - 6.0)) *
                 std::pow(f, -1.0 - 0.5 * n) * sobolev_Kn_pow_minus_n(n) * lp.weyl_sq *
                 std::pow(t, 4.0) * lp.mu * lp.mu / lp.tau;
        return v;
    };
    const double tstar = std::pow(a / b, 2.0 / (n - 6.0));
    double lo = 1e-3 * tstar, hi = 1e3 * tstar;
    if (!(bal(lo) > 0.0 && bal(hi) < 0.0)) throw NumericalError("solve_t0: no bracket");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (bal(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ReductionState run_reduction(const ModelConfig& cfg, const GroundState& gs,
                             const BackgroundProfile& bg, double t, const std::vector<double>& p,
                             const ReductionOptions& opt) {
    Reducer red(cfg, gs, bg, t, p, opt);
    return red.pingpong_outer();
}

BackgroundProfile make_background(const ModelConfig& cfg, const GroundState& gs,
                                  const ReductionOptions& opt, double t_max) {
    const double delta_max = cfg.mu * t_max;
    const double r_max = std::max(opt.r_max_factor * std::sqrt(delta_max), 2.5 * cfg.r_cut) +
                         cfg.beta + 1.0;
    return BackgroundProfile::solve(cfg, gs, r_max, opt.N_grid);
}

ModelConfig config_with_mu(const ModelConfig& base, double mu) {
    ModelConfig cfg = base;
    cfg.mu = mu;
    if (cfg.n == 6) cfg.tau = mu;
    else if (cfg.n <= 10) cfg.tau = std::pow(mu, 0.5 * (cfg.n - 6));
    else cfg.tau = mu * mu;
    cfg.beta = cfg.beta_coef * std::pow(mu, cfg.beta_exponent);
    cfg.r_cut = std::pow(mu, 1.0 / cfg.rcut_exponent);
    validate_model(cfg);
    return cfg;
}

ZeroResult find_zero(const ModelConfig& cfg, const GroundState& gs, const BackgroundProfile& bg,
                     const ReductionOptions& opt, double t_seed,
                     const std::vector<double>& p_seed) {
    ZeroResult res;
    const int n = cfg.n;
    // active parameter count: 1 (t) + active axes at the seed
    double pn = 0.0;
    for (double x : p_seed) pn += x * x;
    pn = std::sqrt(pn);
    const int mdim = pn > 0.0 ? 1 : 0;  // the zero search keeps p on its seed axis

    auto lam_normalized = [&](double t, const std::vector<double>& p, ReductionState* out_st) {
        ReductionState st = run_reduction(cfg, gs, bg, t, p, opt);
        ++res.pipeline_runs;
        std::vector<double> g;
        g.push_back(st.lambdas[0] / std::pow(cfg.mu, 0.5 * (n - 2)));
        if (mdim > 0) {
            // component along the p axis
            double la = 0.0;
            for (int i = 0; i < n; ++i) la += st.lambdas[i + 1] * (pn > 0 ? p[i] / pn : 0.0);
            g.push_back(la * cfg.beta / std::pow(cfg.mu, 0.5 * n));
        }
        if (out_st) *out_st = std::move(st);
        return g;
    };

    ReductionState st0;
    std::vector<double> g0 = lam_normalized(t_seed, p_seed, &st0);
    double n0 = 0.0;
    for (double v : g0) n0 = std::max(n0, std::abs(v));
    res.seed_norm = n0;

    double t = t_seed;
    std::vector<double> p = p_seed;
    std::vector<double> g = g0;

    const int dim = 1 + mdim;
    bool newton_ok = dim > 0;
    for (int it = 0; it < 14 && newton_ok; ++it) {
        double gn = 0.0;
        for (double v : g) gn = std::max(gn, std::abs(v));
        if (gn < 1e-3 * std::max(n0, 1e-300)) break;
        // finite-difference Jacobian
        Eigen::MatrixXd J(dim, dim);
        Eigen::VectorXd gv(dim);
        for (int i = 0; i < dim; ++i) gv(i) = g[i];
        const double ht = 1e-3 * std::max(t, 0.1);
        std::vector<double> gp = lam_normalized(t + ht, p, nullptr);
        for (int i = 0; i < dim; ++i) J(i, 0) = (gp[i] - g[i]) / ht;
        if (mdim > 0) {
            const double hp = 1e-3;
            std::vector<double> p2 = p;
            for (int i = 0; i < n; ++i) p2[i] += hp * (pn > 0 ? p[i] / pn : 0.0);
            std::vector<double> gq = lam_normalized(t, p2, nullptr);
            for (int i = 0; i < dim; ++i) J(i, 1) = (gq[i] - g[i]) / hp;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (!lu.isInvertible() || lu.rcond() < 1e-10) {
            newton_ok = false;
            break;
        }
        Eigen::VectorXd step = lu.solve(-gv);
        double damp = 1.0;
        for (int tries = 0; tries < 6; ++tries) {
            const double tn = t + damp * step(0);
            std::vector<double> pnew = p;
            if (mdim > 0)
                for (int i = 0; i < n; ++i)
                    pnew[i] += damp * step(1) * (pn > 0 ? p[i] / pn : 0.0);
            if (tn < 1.0 / opt.D || tn > opt.D) {
                damp *= 0.5;
                continue;
            }
            std::vector<double> gn2 = lam_normalized(tn, pnew, nullptr);
            double ngn2 = 0.0, ngn = 0.0;
            for (double v : gn2) ngn2 = std::max(ngn2, std::abs(v));
            for (double v : g) ngn = std::max(ngn, std::abs(v));
            if (ngn2 < ngn) {
                t = tn;
                p = pnew;
                g = gn2;
                break;
            }
            damp *= 0.5;
            if (tries == 5) newton_ok = false;
        }
    }

    double gn_final = 0.0;
    for (double v : g) gn_final = std::max(gn_final, std::abs(v));
    if (!newton_ok || gn_final >= 1e-3 * std::max(n0, 1e-300)) {
        // sign-box bisection in t at fixed p (decoupled or fallback)
        auto g0of = [&](double tt) { return lam_normalized(tt, p, nullptr)[0]; };
        double lo = t_seed, hi = t_seed;
        double glo = g[0], ghi = g[0];
        // expand a bracket around the seed
        for (int k = 1; k <= 8 && glo * ghi >= 0.0; ++k) {
            lo = std::max(1.0 / opt.D, t_seed * std::pow(0.8, k));
            hi = std::min(opt.D, t_seed * std::pow(1.25, k));
            glo = g0of(lo);
            ghi = g0of(hi);
        }
        if (glo * ghi >= 0.0)
            throw RegimeError("find_zero: no sign change of lambda_0 in the box");
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double gm = g0of(mid);
            if (std::abs(gm) < 1e-3 * std::max(n0, 1e-300)) {
                lo = hi = mid;
                break;
            }
            if (gm * glo < 0.0) {
                hi = mid;
                ghi = gm;
            } else {
                lo = mid;
                glo = gm;
            }
        }
        t = 0.5 * (lo + hi);
        g = lam_normalized(t, p, nullptr);
        gn_final = 0.0;
        for (double v : g) gn_final = std::max(gn_final, std::abs(v));
    }

    ReductionState stf;
    g = lam_normalized(t, p, &stf);
    res.t_star = t;
    res.p_star = p;
    gn_final = 0.0;
    for (double v : g) gn_final = std::max(gn_final, std::abs(v));
    res.residual_norm = gn_final;
    // blow-up certificate at the located zero
    const double delta = cfg.mu * t;
    const double peak = stf.phi.l0[0] + bg.value(cfg.beta * pn) +
                        std::pow(delta, -0.5 * (n - 2));
    res.certificate = peak >= 0.5 * std::pow(delta, -0.5 * (n - 2));
    return res;
}

ConvergenceStudy convergence_study(const ModelConfig& base_cfg, const std::vector<double>& mu_list,
                                   double t, const std::vector<double>& p,
                                   const ReductionOptions& opt, int workers) {
    if (mu_list.size() < 3)
        throw ConfigError("convergence_study requires at least 3 scales");
    ConvergenceStudy cs;
    std::map<std::string, std::vector<std::pair<double, double>>> series;  // name -> (mu, err)

    // per-scale runs are independent; fan out bounded by `workers`,
    // results aggregated below in list order
    struct ScaleResult {
        ModelConfig cfg;
        GroundState gs;
        ReductionState st;
        LeadingParams lp;
        std::map<std::string, double> ints;
        int active_axes = 0;
        std::vector<double> axis0;
    };
    std::vector<ScaleResult> results(mu_list.size());
    std::exception_ptr err;
    std::mutex err_mtx;
    auto run_scale = [&](size_t idx) {
        try {
            ScaleResult r;
            r.cfg = config_with_mu(base_cfg, mu_list[idx]);
            r.gs = solve_ground_state(r.cfg);
            BackgroundProfile bg = make_background(r.cfg, r.gs, opt, t);
            Reducer red(r.cfg, r.gs, bg, t, p, opt);
            r.st = red.pingpong_outer();
            r.lp = make_leading_params(r.cfg, r.gs, bg, t, p);
            r.ints = numeric_integrals(red, r.st);
            r.active_axes = red.active_axes();
            if (r.active_axes > 0) r.axis0 = red.axes()[0];
            results[idx] = std::move(r);
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mtx);
            if (!err) err = std::current_exception();
        }
    };
    if (workers <= 1) {
        for (size_t i = 0; i < mu_list.size(); ++i) run_scale(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int w = 0; w < std::min<int>(workers, mu_list.size()); ++w)
            pool.emplace_back([&] {
                for (size_t i = next++; i < mu_list.size(); i = next++) run_scale(i);
            });
        for (auto& th : pool) th.join();
    }
    if (err) std::rethrow_exception(err);

    for (size_t idx = 0; idx < mu_list.size(); ++idx) {
        const double mu = mu_list[idx];
        ModelConfig& cfg = results[idx].cfg;
        ReductionState& st = results[idx].st;
        LeadingParams& lp = results[idx].lp;
        auto& ints = results[idx].ints;
        const int n = cfg.n;
        const double dl = mu * t;

        const double lam0_lead = predicted_lambda0(lp);
        const double lam0 = st.lambdas[0];
        const double rel0 = std::abs(lam0 - lam0_lead) / std::max(1e-300, std::abs(lam0_lead));
        cs.rows.push_back({mu, "lambda0", lam0_lead, std::nan(""), lam0, rel0});
        series["lambda0"].push_back({mu, rel0});

        if (results[idx].active_axes > 0) {
            // normalized i-row along the first active axis
            const auto& ax = results[idx].axis0;
            double la = 0.0;
            for (int i = 0; i < n; ++i) la += st.lambdas[i + 1] * ax[i];
            const double la_n = la * cfg.beta / std::pow(mu, 0.5 * n);
            double lead = 0.0;
            for (int i = 0; i < n; ++i)
                lead += (n >= 7 ? leading_term("I1_i", lp, i) + leading_term("I3_i", lp, i)
                                : leading_term("J1_i", lp, i)) *
                        ax[i];
            auto G = gram_V(n, lp.f_center);
            lead = lead * cfg.beta / std::pow(mu, 0.5 * n) / G[1][1];
            const double reli =
                std::abs(la_n - lead) / std::max(1e-300, std::abs(lead));
            cs.rows.push_back({mu, "lambda_i_norm", lead, std::nan(""), la_n, reli});
            series["lambda_i_norm"].push_back({mu, reli});
        }

        const std::string i1 = n >= 7 ? "I1" : "J1";
        const double i1num = ints[i1 + "_0"];
        const double i1lead = leading_term(n >= 7 ? "I1_0" : "J1_0", lp);
        const double rel1 = std::abs(i1num - i1lead) / std::max(1e-300, std::abs(i1lead));
        cs.rows.push_back({mu, i1 + "_0", i1lead, i1num, std::nan(""), rel1});
        series[i1 + "_0"].push_back({mu, rel1});

        if (n >= 7) {
            const double i3num = ints["I3_0"];
            const double i3lead = leading_term("I3_0", lp);
            const double rel3 = std::abs(i3num - i3lead) / std::max(1e-300, std::abs(i3lead));
            cs.rows.push_back({mu, "I3_0", i3lead, i3num, std::nan(""), rel3});
            series["I3_0"].push_back({mu, rel3});
            const double i2r = std::abs(ints["I2_0"]) / std::pow(dl, 0.5 * (n - 2));
            cs.rows.push_back({mu, "I2_0_scaled", 0.0, std::abs(ints["I2_0"]), std::nan(""), i2r});
            series["I2_0_scaled"].push_back({mu, i2r});
            const double i6r = std::abs(ints["I6_0"]) / std::pow(dl, 0.5 * n);
            cs.rows.push_back({mu, "I6_0_scaled", 0.0, std::abs(ints["I6_0"]), std::nan(""), i6r});
            series["I6_0_scaled"].push_back({mu, i6r});
        } else {
            const double j5num = ints["J5_0"];
            const double j5lead = leading_term("J5_0", lp);
            const double rel5 = std::abs(j5num - j5lead) / std::max(1e-300, std::abs(j5lead));
            cs.rows.push_back({mu, "J5_0", j5lead, j5num, std::nan(""), rel5});
            series["J5_0"].push_back({mu, rel5});
        }
    }
    for (auto& [name, pts] : series) {
        // least-squares slope of log(err) vs log(mu); positive order means
        // the discrepancy decreases with mu
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const int m = static_cast<int>(pts.size());
        bool mono = true;
        for (int i = 0; i < m; ++i) {
            const double x = std::log(pts[i].first), y = std::log(std::max(pts[i].second, 1e-300));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            if (i > 0 && pts[i].second > pts[i - 1].second * (1.0 + 1e-12)) mono = false;
        }
        cs.fitted_order[name] = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        // mu_list descending => err should increase along the vector if order>0;
        // monotone flag: err decreases as mu decreases
        cs.monotone[name] = mono;
    }
    return cs;
}

}  // namespace blowup
