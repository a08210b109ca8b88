#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blowup/expansion.hpp"
#include "blowup/quadrature.hpp"

using namespace blowup;

namespace {

LeadingParams bare_params(int n, double tau, double mu, double f, double u) {
    LeadingParams lp;
    lp.n = n;
    lp.t = 1.0;
    lp.tau = tau;
    lp.mu = mu;
    lp.beta = std::pow(mu, 0.75);
    lp.f_center = f;
    lp.u_center = u;
    lp.h0 = 0.0;
    lp.H_p = 1.0;
    lp.gradH_p.assign(n, 0.0);
    lp.grad_u.assign(n, 0.0);
    return lp;
}

ModelConfig n6_config(double alpha = 0.0) {
    std::map<std::string, double> raw{{"n", 6},            {"tau", 1e-2},
                                      {"f0", 4.0},         {"h0", 0.6704},
                                      {"rho0", 1.3849e-6}, {"alpha", alpha},
                                      {"beta_exponent", 0.5}, {"beta_coef", 0.9},
                                      {"rcut_exponent", 8.0}};
    return make_model(raw);
}

}  // namespace

TEST_CASE("leading I1_0 at n=7 matches the bare coefficient") {
    // tau = 1e-3, mu = tau^2, f = 1, H(p) = 1, no background offset:
    // value = (8*6/(5*3)) K_7^{-7} tau mu^2
    auto lp = bare_params(7, 1e-3, 1e-6, 1.0, 0.3);
    const double expect = 48.0 / 15.0 * sobolev_Kn_pow_minus_n(7) * 1e-3 * 1e-12;
    CHECK(leading_term("I1_0", lp) == doctest::Approx(expect).epsilon(1e-12));
    // critical point of H: I1_i vanishes at p = 0
    for (int i = 0; i < 7; ++i) CHECK(leading_term("I1_i", lp, i) == 0.0);
    // weyl term only enters when weyl_sq > 0
    auto lpw = lp;
    lpw.weyl_sq = 2.0;
    CHECK(leading_term("I1_0", lpw) < leading_term("I1_0", lp));
}

TEST_CASE("leading I3 terms carry the quadrature-verified constants") {
    auto lp = bare_params(7, 1e-3, 1e-6, 1.3, 0.42);
    const double expect = -(7.0 - 2.0) * std::pow(35.0, 2.5) * sphere_volume(6) *
                          std::pow(1.3, 1.0 - 3.5) * 0.42 * std::pow(1e-6, 2.5);
    CHECK(leading_term("I3_0", lp) == doctest::Approx(expect).epsilon(1e-12));
    auto lps = lp;
    lps.grad_u[2] = 0.7;
    CHECK(leading_term("I3_i", lps, 2) ==
          doctest::Approx(-I3i_constant(7) * std::pow(1.3, -2.5) * 0.7 *
                          std::pow(1e-6, 3.5))
              .epsilon(1e-10));
    CHECK(leading_term("I3_i", lps, 1) == 0.0);
}

TEST_CASE("solve_t0: n=6 closed form vs bisection, kappa sign guard") {
    auto lp = bare_params(6, 1e-2, 1e-2, 1.0, 0.2);
    const double kap = 1234.5;
    const double closed = 5.0 * sobolev_Kn_pow_minus_n(6) * 1.0 / kap;
    CHECK(solve_t0(lp, kap) == doctest::Approx(closed).epsilon(1e-12));
    CHECK_THROWS_AS(solve_t0(lp, -1.0), RegimeError);
}

TEST_CASE("solve_t0: n=7 homogeneity t0 ~ u0^{-2}") {
    auto lp = bare_params(7, 1e-2, 1e-4, 1.0, 0.25);
    const double t1 = solve_t0(lp);
    auto lp2 = lp;
    lp2.u_center *= 2.0;
    const double t2 = solve_t0(lp2);
    CHECK(t2 == doctest::Approx(t1 / 4.0).epsilon(1e-10));
    // explicit balance root: a t^2 = b u t^{5/2}
    const double a = 8.0 * 6.0 / (5.0 * 3.0) * sobolev_Kn_pow_minus_n(7) * lp.H_p;
    const double b = 5.0 * std::pow(35.0, 2.5) * sphere_volume(6) * lp.u_center;
    CHECK(t1 == doctest::Approx(std::pow(a / b, 2.0)).epsilon(1e-10));
}

TEST_CASE("engine kappa split agrees with the quadrature kappa at f=1") {
    // at f0 = 1 the two prefactor conventions coincide for the rho part
    KappaParams kp;
    kp.f0 = 1.0;
    kp.u0 = 0.12;
    kp.rho_at_center = std::pow(0.12, 6.0);
    kp.alpha = 0.0;
    auto ks = engine_kappa_split(1.0, 0.12, kp.rho_at_center);
    CHECK(ks.rho_part == doctest::Approx(kappa(kp)).epsilon(1e-7));
    // linearity in rho
    auto ks2 = engine_kappa_split(1.0, 0.12, 2.0 * kp.rho_at_center);
    CHECK(ks2.rho_part == doctest::Approx(2.0 * ks.rho_part).epsilon(1e-10));
}

TEST_CASE("reduced map F: zero structure") {
    auto cfg = n6_config();
    auto gs = solve_ground_state(cfg);
    ReductionOptions opt;
    opt.N_grid = 200;
    auto bg = make_background(cfg, gs, opt, 1.0);
    LeadingParams lp = make_leading_params(cfg, gs, bg, 1.0, std::vector<double>(6, 0.0));
    KappaParams kp{cfg.f0, gs.u0, cfg.rho0, cfg.alpha};
    const double kap = kappa(kp);
    const double t0 = solve_t0(lp, kap);
    auto F0 = reduced_map_F(lp, t0, std::vector<double>(6, 0.0), cfg);
    // the t-balance vanishes at t0 up to the small flat-model offset
    const double scale = std::abs(5.0 * sobolev_Kn_pow_minus_n(6) * std::pow(cfg.f0, -3.0) *
                                  t0 * t0);
    CHECK(std::abs(F0[0]) < 2e-2 * scale);
    for (int i = 1; i <= 6; ++i) CHECK(F0[i] == 0.0);  // grad H(0) = 0
    // sign change across t0
    auto Fa = reduced_map_F(lp, 0.5 * t0, std::vector<double>(6, 0.0), cfg);
    auto Fb = reduced_map_F(lp, 2.0 * t0, std::vector<double>(6, 0.0), cfg);
    CHECK(Fa[0] * Fb[0] < 0.0);
    // off-center p: the i-components follow grad H
    std::vector<double> p(6, 0.0);
    p[1] = 0.4;
    auto Fp = reduced_map_F(lp, t0, p, cfg);
    CHECK(Fp[2] != 0.0);
    CHECK(Fp[1] == 0.0);
}

TEST_CASE("config_with_mu rederives the scale family") {
    auto cfg = n6_config();
    auto c2 = config_with_mu(cfg, 2.5e-3);
    CHECK(c2.tau == doctest::Approx(2.5e-3));
    CHECK(c2.beta == doctest::Approx(0.9 * std::sqrt(2.5e-3)));
    CHECK(c2.r_cut == doctest::Approx(std::pow(2.5e-3, 1.0 / 8.0)));
    std::map<std::string, double> raw7{{"n", 7}, {"tau", 0.1}, {"f0", 4.0},
                                       {"h0", 2.49691}, {"rho0", 3e-3}};
    auto c7 = config_with_mu(make_model(raw7), 5e-3);
    CHECK(c7.tau == doctest::Approx(std::sqrt(5e-3)));
}

TEST_CASE("convergence study requires three scales") {
    auto cfg = n6_config();
    ReductionOptions opt;
    CHECK_THROWS_AS(convergence_study(cfg, {1e-2}, 0.5, std::vector<double>(6, 0.0), opt),
                    ConfigError);
}

TEST_CASE("find_zero on the decoupled n=6 configuration") {
    auto cfg = n6_config();
    auto gs = solve_ground_state(cfg);
    ReductionOptions opt;
    opt.N_grid = 340;
    auto bg = make_background(cfg, gs, opt, 2.0);
    auto ks = engine_kappa_split(cfg.f0, bg.value(0.0), cfg.rho0);
    LeadingParams lp = make_leading_params(cfg, gs, bg, 1.0, std::vector<double>(6, 0.0));
    const double t0 = solve_t0(lp, ks.rho_part);
    auto zr = find_zero(cfg, gs, bg, opt, t0, std::vector<double>(6, 0.0));
    CHECK(zr.t_star > 1.0 / opt.D);
    CHECK(zr.t_star < opt.D);
    CHECK(zr.residual_norm < 1e-3 * zr.seed_norm);
    CHECK(zr.certificate);
    // the peak value of u_k at the zero is delta^{-(n-2)/2} at the center
    const double delta = cfg.mu * zr.t_star;
    CHECK(std::pow(delta, -2.0) > 100.0);  // blow-up scale present
}

TEST_CASE("parallel sweep matches serial sweep") {
    auto cfg = n6_config();
    ReductionOptions opt;
    opt.N_grid = 260;
    std::vector<double> p(6, 0.0);
    auto a = convergence_study(cfg, {1e-2, 5e-3, 2.5e-3}, 0.5, p, opt, 1);
    auto b = convergence_study(cfg, {1e-2, 5e-3, 2.5e-3}, 0.5, p, opt, 3);
    REQUIRE(a.rows.size() == b.rows.size());
    for (size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].name == b.rows[i].name);
        if (std::isfinite(a.rows[i].pipeline))
            CHECK(a.rows[i].pipeline == doctest::Approx(b.rows[i].pipeline).epsilon(1e-14));
    }
}

TEST_CASE("n=8 pipeline tracks its leading expansion") {
    // mu = tau at n = 8, so the bump and mass terms share the mu^3 row
    std::map<std::string, double> raw{{"n", 8},      {"tau", 0.01},
                                      {"f0", 4.0},   {"h0", 3.2},
                                      {"rho0", 0.02}, {"alpha", 0.5},
                                      {"beta_exponent", 0.45}, {"rcut_exponent", 8.0}};
    auto base = make_model(raw);
    ReductionOptions opt;
    opt.N_grid = 340;
    std::vector<double> p(8, 0.0);
    p[0] = 0.3;
    for (double mu : {1e-2, 5e-3}) {
        auto cfg = config_with_mu(base, mu);
        auto gs = solve_ground_state(cfg);
        auto bg = make_background(cfg, gs, opt, 1.0);
        Reducer red(cfg, gs, bg, 1.0, p, opt);
        auto st = red.pingpong_outer();
        LeadingParams lp = make_leading_params(cfg, gs, bg, 1.0, p);
        const double lead = predicted_lambda0(lp);
        CHECK(std::abs(st.lambdas[0] - lead) < 0.01 * std::abs(lead));
        CHECK(st.diag.inner_contraction.back() < 0.5);
        CHECK(st.diag.min_uk > gs.eps0);
    }
}
