// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "blowup/expansion.hpp"
#include "blowup/io.hpp"
#include "blowup/profiles.hpp"
#include "blowup/quadrature.hpp"
#include "blowup/vector_green.hpp"

using namespace blowup;

namespace {

int g_failures = 0;

struct Criterion {
    const char* name;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;

    explicit Criterion(const char* n) : name(n) {}
    void check(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void finish() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        printf("[%s] %-55s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", name, secs,
               detail.empty() ? "" : " -- ", detail.c_str());
        fflush(stdout);
        if (!ok) ++g_failures;
    }
};

template <class F>
double fd_laplacian(F&& f, std::vector<double> y, double h) {
    double acc = 0.0;
    for (size_t d = 0; d < y.size(); ++d) {
        const double x0 = y[d];
        auto at = [&](double s) {
            y[d] = x0 + s;
            const double v = f(y);
            y[d] = x0;
            return v;
        };
        acc += (-at(-2 * h) + 16 * at(-h) - 30 * at(0) + 16 * at(h) - at(2 * h)) / (12 * h * h);
    }
    return -acc;
}

ModelConfig n7_default() {
    std::map<std::string, double> raw{{"n", 7},           {"tau", 0.1},
                                      {"f0", 4.0},        {"h0", 2.49691},
                                      {"rho0", 3e-3},     {"alpha", 1.0},
                                      {"beta_exponent", 0.45}, {"rcut_exponent", 8.0}};
    return make_model(raw);
}

ModelConfig n6_default(double alpha = 0.0) {
    std::map<std::string, double> raw{{"n", 6},            {"tau", 1e-2},
                                      {"f0", 4.0},         {"h0", 0.6704},
                                      {"rho0", 1.3849e-6}, {"alpha", alpha},
                                      {"beta_exponent", 0.5}, {"beta_coef", 0.9},
                                      {"rcut_exponent", 8.0}};
    return make_model(raw);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 1. kernel identity at 100 random points per (n, f), FD oracle, 1e-6
void criterion1() {
    Criterion c("1 kernel identity Delta V = (2*-1) f U^{2*-2} V");
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int n : {6, 7, 8, 11}) {
        for (double f : {0.5, 1.0, 3.0}) {
            double worst = 0.0;
            for (int rep = 0; rep < 100; ++rep) {
                std::vector<double> y(n);
                for (auto& v : y) v = U(rng);
                const int i = rep % (n + 1);
                auto fn = [&](const std::vector<double>& z) { return kernel_V(i, f, n, z); };
                const double lhs = fd_laplacian(fn, y, 1e-3);
                const double rhs = (crit_exp(n) - 1.0) * f *
                                   std::pow(standard_bubble_U(f, n, y), crit_exp(n) - 2.0) *
                                   kernel_V(i, f, n, y);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
            c.check(worst < 1e-6, "n=" + std::to_string(n) + " f=" + std::to_string(f) +
                                      " worst=" + std::to_string(worst));
        }
    }
    c.finish();
}

// 2. quadrature Dirichlet energy equals K_n^{-n}, n = 6..11, 1e-6 relative
void criterion2() {
    Criterion c("2 sharp constant int |grad U|^2 = K_n^{-n}");
    for (int n = 6; n <= 11; ++n) {
        auto e = bubble_energy(n, 1.0);
        const double rel = std::abs(e.dirichlet - sobolev_Kn_pow_minus_n(n)) /
                           sobolev_Kn_pow_minus_n(n);
        c.check(rel < 1e-6, "n=" + std::to_string(n) + " rel=" + std::to_string(rel));
        const double poho = std::abs(e.dirichlet - e.mass2star) / e.dirichlet;
        c.check(poho < 1e-6, "pohozaev n=" + std::to_string(n));
    }
    c.finish();
}

// 3. Gram off-diagonals < 1e-8 max diagonal; diagonals vs stored baselines
void criterion3() {
    Criterion c("3 gram suite vs brute-force baselines");
    struct Base {
        int n;
        double f, g00, g11;
    };
    // baselines computed by an independent 1-D quadrature oracle
    const Base bases[] = {{6, 1.0, 2041.09889918, 12246.5933951},
                          {6, 3.0, 226.788766576, 4082.19779837},
                          {7, 1.0, 14477.345528, 126676.77337},
                          {8, 0.5, 911971.741429, 5471830.44858}};
    for (const auto& b : bases) {
        auto G = gram_V(b.n, b.f);
        double dmax = 0.0, off = 0.0;
        for (size_t i = 0; i < G.size(); ++i) {
            dmax = std::max(dmax, G[i][i]);
            for (size_t j = 0; j < G.size(); ++j)
                if (i != j) off = std::max(off, std::abs(G[i][j]));
        }
        c.check(off < 1e-8 * dmax, "offdiag");
        c.check(std::abs(G[0][0] - b.g00) < 1e-6 * b.g00, "G00 n=" + std::to_string(b.n));
        c.check(std::abs(G[1][1] - b.g11) < 1e-6 * b.g11, "G11 n=" + std::to_string(b.n));
    }
    c.finish();
}

// 4. Kelvin convolution reproduces the far-field law within 2% on [20d,50d]
void criterion4() {
    Criterion c("4 Kelvin response matches the far-field law");
    for (int n : {6, 7}) {
        // the source width scales like sqrt(n(n-2)/f) delta; keep the
        // window [20 delta, 50 delta] in the far-field regime
        const double f = n == 6 ? 4.0 : 6.0, delta = 1e-3;
        BubbleParams bp;
        bp.n = n;
        bp.mu = delta;
        bp.t = 1.0;
        bp.center.assign(n, 0.0);
        bp.f_center = f;
        bp.r_cut = 1e9;
        auto grid = RadialGrid::make(n, 150.0 * delta, delta, 420);
        auto table = KelvinTable::build(grid);
        std::vector<double> q(grid.size());
        for (int i = 0; i < grid.size(); ++i)
            q[i] = std::pow(bubble_pure(bp, grid.r[i]), crit_exp(n));
        auto F = table.convolve(q, {1.0, 0.0});
        double worst = 0.0;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (int i = 1; i <= grid.N; ++i) {
            const double d = grid.r[i];
            if (d >= 20.0 * delta && d <= 50.0 * delta) {
                auto cf = theta_asymptotic_coeffs(n, f, 1.0, d);
                worst = std::max(worst, std::abs(F.a1[i] - cf[0]) / std::abs(cf[0]));
            }
            if (d >= 10.0 * delta && d <= 100.0 * delta) {
                sx += std::log(d);
                sy += std::log(std::abs(F.a1[i]));
                sxx += std::log(d) * std::log(d);
                sxy += std::log(d) * std::log(std::abs(F.a1[i]));
                ++m;
            }
        }
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        c.check(worst < 0.02, "n=" + std::to_string(n) + " rel=" + std::to_string(worst));
        c.check(std::abs(slope - (1.0 - n)) < 0.05,
                "decay slope n=" + std::to_string(n) + " got " + std::to_string(slope));
    }
    c.finish();
}

struct PipelinePoint {
    double mu = 0.0;
    ReductionState st;
    MonitorReport mon;
    double inner_contr = 0.0;
    double lambda0_lead = 0.0;
    double lambda_i_norm = 0.0, lambda_i_lead = 0.0;
};

std::vector<PipelinePoint> run_n7_scales(const std::vector<double>& mus, double t,
                                         const std::vector<double>& p, int N_grid) {
    std::vector<PipelinePoint> out;
    ModelConfig base = n7_default();
    ReductionOptions opt;
    opt.N_grid = N_grid;
    for (double mu : mus) {
        PipelinePoint pt;
        pt.mu = mu;
        ModelConfig cfg = config_with_mu(base, mu);
        GroundState gs = solve_ground_state(cfg);
        BackgroundProfile bg = make_background(cfg, gs, opt, t);
        Reducer red(cfg, gs, bg, t, p, opt);
        pt.st = red.pingpong_outer();
        pt.mon = red.pointwise_monitors(pt.st);
        for (double f : pt.st.diag.inner_contraction)
            pt.inner_contr = std::max(pt.inner_contr, f);
        LeadingParams lp = make_leading_params(cfg, gs, bg, t, p);
        pt.lambda0_lead = predicted_lambda0(lp);
        if (red.active_axes() > 0) {
            const auto& ax = red.axes()[0];
            double la = 0.0, lead = 0.0;
            for (int i = 0; i < cfg.n; ++i) {
                la += pt.st.lambdas[i + 1] * ax[i];
                lead += (leading_term("I1_i", lp, i) + leading_term("I3_i", lp, i)) * ax[i];
            }
            auto G = gram_V(cfg.n, lp.f_center);
            pt.lambda_i_norm = la * cfg.beta / std::pow(mu, 3.5);
            pt.lambda_i_lead = lead * cfg.beta / std::pow(mu, 3.5) / G[1][1];
        }
        out.push_back(std::move(pt));
    }
    return out;
}

// 5. contraction factors < 0.5 and decreasing under mu halving (n=7)
// 9. pointwise monitors across the same scales
void criteria_5_9(const std::vector<PipelinePoint>& pts) {
    {
        Criterion c("5 inner/outer contraction < 0.5, decreasing in mu");
        for (const auto& pt : pts) {
            c.check(pt.inner_contr < 0.5,
                    "inner " + std::to_string(pt.inner_contr) + " at mu=" + std::to_string(pt.mu));
            c.check(pt.st.diag.outer_contraction < 0.5, "outer");
        }
        for (size_t i = 1; i < pts.size(); ++i)
            c.check(pts[i].inner_contr < pts[i - 1].inner_contr, "inner factor not decreasing");
        c.finish();
    }
    {
        Criterion c("9 pointwise monitors: sup, far field, min u_k");
        std::vector<double> C;
        for (const auto& pt : pts) {
            C.push_back(pt.mon.sup_ratio / (pt.mu * 1.0));
            c.check(pt.mon.min_uk >= pt.mon.eps0, "min u_k below eps0");
            c.check(!pt.mon.truncation_active, "truncation active");
            c.check(pt.mon.far_field_sup < 100.0 * pt.mon.far_field_bound,
                    "far-field constant above 100");
        }
        const double cmin = *std::min_element(C.begin(), C.end());
        const double cmax = *std::max_element(C.begin(), C.end());
        c.check((cmax - cmin) / cmax < 0.30,
                "sup/(delta) constant varies " + std::to_string((cmax - cmin) / cmax));
        c.finish();
    }
}

// 6. lambda expansion reproduction over four dyadic scales (n=7)
void criterion6(const std::vector<PipelinePoint>& pts) {
    Criterion c("6 lambda expansion: monotone errors, positive order");
    std::vector<double> rel0, reli;
    for (const auto& pt : pts) {
        rel0.push_back(std::abs(pt.st.lambdas[0] - pt.lambda0_lead) /
                       std::abs(pt.lambda0_lead));
        reli.push_back(std::abs(pt.lambda_i_norm - pt.lambda_i_lead) /
                       std::abs(pt.lambda_i_lead));
    }
    for (size_t i = 1; i < rel0.size(); ++i) {
        c.check(rel0[i] < rel0[i - 1], "lambda0 error not decreasing");
        c.check(reli[i] < reli[i - 1], "lambda_i error not decreasing");
    }
    auto order = [&](const std::vector<double>& rel) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const int m = static_cast<int>(rel.size());
        for (int i = 0; i < m; ++i) {
            const double x = std::log(pts[i].mu), y = std::log(rel[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        return (m * sxy - sx * sy) / (m * sxx - sx * sx);
    };
    const double o0 = order(rel0), oi = order(reli);
    c.check(o0 > 0.0, "lambda0 order " + std::to_string(o0));
    c.check(oi > 0.0, "lambda_i order " + std::to_string(oi));
    c.finish();
}

// 7. kappa and t0 at n=6
void criterion7() {
    Criterion c("7 kappa sign, alpha* bracket, t0 closed form");
    ModelConfig cfg = n6_default();
    GroundState gs = solve_ground_state(cfg);
    KappaParams kp{cfg.f0, gs.u0, cfg.rho0, 0.0};
    const double k0 = kappa(kp);
    c.check(k0 > 0.0, "kappa(alpha=0) <= 0");
    const double astar = critical_alpha(kp);
    KappaParams lo = kp, hi = kp;
    lo.alpha = 0.5 * astar;
    hi.alpha = 2.0 * astar;
    c.check(kappa(lo) > 0.0, "kappa(alpha*/2) <= 0");
    c.check(kappa(hi) < 0.0, "kappa(2 alpha*) >= 0");
    LeadingParams lp;
    lp.n = 6;
    lp.f_center = cfg.f0;
    lp.H_p = 1.0;
    lp.tau = cfg.tau;
    lp.mu = cfg.mu;
    const double closed = 5.0 * sobolev_Kn_pow_minus_n(6) * std::pow(cfg.f0, -3.0) / k0;
    const double bis = solve_t0(lp, k0);  // internally confirms by bisection at 1e-12
    c.check(std::abs(bis - closed) <= 1e-12 * std::max(1.0, closed), "t0 mismatch");
    c.finish();
}

// 8. zero finding in the decoupled case, |t* - t0| decreasing, certificate
void criterion8() {
    Criterion c("8 zero of lambda_0: sign change, convergence, certificate");
    ModelConfig base = n6_default();
    ReductionOptions opt;
    opt.N_grid = 420;
    std::vector<double> p(6, 0.0);
    std::vector<double> gaps;
    for (double mu : {1e-2, 5e-3, 2.5e-3}) {
        ModelConfig cfg = config_with_mu(base, mu);
        GroundState gs = solve_ground_state(cfg);
        BackgroundProfile bg = make_background(cfg, gs, opt, 2.0);
        auto ks = engine_kappa_split(cfg.f0, bg.value(0.0), cfg.rho0);
        LeadingParams lp = make_leading_params(cfg, gs, bg, 1.0, p);
        const double t0 = solve_t0(lp, ks.rho_part);
        // sign change of lambda_0 on a bracket containing t0
        auto lam0 = [&](double t) {
            return run_reduction(cfg, gs, bg, t, p, opt).lambdas[0];
        };
        const double glo = lam0(0.2), ghi = lam0(1.25 * t0);
        c.check(glo * ghi < 0.0, "no sign change around t0 at mu=" + std::to_string(mu));
        auto zr = find_zero(cfg, gs, bg, opt, t0, p);
        c.check(zr.residual_norm < 1e-3 * zr.seed_norm, "residual not reduced");
        c.check(zr.certificate, "blow-up certificate failed");
        c.check(zr.t_star > 1.0 / opt.D && zr.t_star < opt.D, "zero not interior");
        gaps.push_back(std::abs(zr.t_star - t0));
    }
    for (size_t i = 1; i < gaps.size(); ++i)
        c.check(gaps[i] < gaps[i - 1], "|t*-t0| not decreasing");
    c.finish();
}

// 10. determinism: repeated sweeps byte-identical
void criterion10() {
    Criterion c("10 determinism: repeated sweep byte-identical");
    ModelConfig cfg = n6_default();
    ReductionOptions opt;
    opt.N_grid = 260;
    std::vector<double> p(6, 0.0);
    auto write_once = [&](const std::string& path) {
        auto cs = convergence_study(cfg, {1e-2, 5e-3, 2.5e-3}, 0.5, p, opt, 2);
        CsvWriter csv(path, {"name", "n", "mu", "closed_form", "quadrature", "pipeline",
                             "rel_err", "order"});
        for (auto& r : cs.rows)
            csv.row({r.name, std::to_string(cfg.n), fmt17(r.mu), fmt17(r.closed_form),
                     fmt17(r.quadrature), fmt17(r.pipeline), fmt17(r.rel_err),
                     fmt17(cs.fitted_order[r.name])});
    };
    write_once("acceptance_sweep_a.csv");
    write_once("acceptance_sweep_b.csv");
    c.check(slurp("acceptance_sweep_a.csv") == slurp("acceptance_sweep_b.csv"),
            "sweep outputs differ");
    c.check(!slurp("acceptance_sweep_a.csv").empty(), "empty sweep output");
    c.finish();
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();

    // shared n=7 pipeline scales feed criteria 5, 6 and 9
    std::vector<double> p7(7, 0.0);
    p7[0] = 0.3;
    auto pts = run_n7_scales({1e-2, 5e-3, 2.5e-3, 1.25e-3}, 1.0, p7, 420);
    criteria_5_9({pts[0], pts[1], pts[2]});
    criterion6(pts);

    criterion7();
    criterion8();
    criterion10();

    printf("%s (%d failure%s)\n", g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
           g_failures, g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
