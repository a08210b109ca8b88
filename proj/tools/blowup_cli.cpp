// Batch driver: parse a config, run one subcommand, emit CSV/JSON tables.
#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "blowup/expansion.hpp"
#include "blowup/io.hpp"
#include "blowup/quadrature.hpp"
#include "blowup/vector_green.hpp"

using namespace blowup;
using nlohmann::json;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

json config_snapshot(const ModelConfig& cfg) {
    json j;
    j["n"] = cfg.n;
    j["tau"] = cfg.tau;
    j["mu"] = cfg.mu;
    j["beta"] = cfg.beta;
    j["r_cut"] = cfg.r_cut;
    j["f0"] = cfg.f0;
    j["s_bump"] = cfg.s_bump;
    j["h0"] = cfg.h0;
    j["rho0"] = cfg.rho0;
    j["alpha"] = cfg.alpha;
    j["zdir"] = cfg.zdir;
    j["weyl_sq"] = cfg.weyl_sq;
    j["beta_exponent"] = cfg.beta_exponent;
    j["beta_coef"] = cfg.beta_coef;
    j["rcut_exponent"] = cfg.rcut_exponent;
    return j;
}

void write_manifest(const std::string& path, const json& m) {
    std::ofstream out(path);
    out << m.dump(2) << "\n";
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos < s.size()) {
        size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        out.push_back(std::stod(s.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

std::vector<double> parse_p(const std::string& s, int n) {
    std::vector<double> p(n, 0.0);
    if (s.empty()) return p;
    auto vals = parse_list(s);
    for (size_t i = 0; i < vals.size() && i < p.size(); ++i) p[i] = vals[i];
    return p;
}

json diag_to_json(const ReductionState& st) {
    json d;
    d["C0"] = st.diag.C0;
    d["eps_k"] = st.diag.eps_k;
    d["eta"] = st.diag.eta;
    d["inner_contraction"] = st.diag.inner_contraction;
    d["outer_contraction"] = st.diag.outer_contraction;
    d["outer_increments"] = st.diag.outer_increments;
    d["outer_iterations"] = st.diag.outer_iterations;
    d["orth_residual"] = st.diag.orth_residual;
    d["gram_offdiag"] = st.diag.gram_offdiag;
    d["source_l1_dropped"] = st.diag.source_l1_dropped;
    d["min_uk"] = st.diag.min_uk;
    d["sup_ratio"] = st.diag.sup_ratio;
    d["lambda_consistency"] = st.diag.lambda_consistency;
    d["truncation_active"] = st.diag.truncation_active;
    return d;
}

int cmd_constants(const std::string& cfg_path, const std::string& outdir) {
    ModelConfig cfg = load_model(cfg_path);
    GroundState gs = solve_ground_state(cfg);
    CsvWriter csv(outdir + "/constants.csv",
                  {"name", "n", "closed_form", "quadrature", "provenance", "warning"});
    const int n = cfg.n;
    const double Kn = sobolev_Kn(n);
    auto e = bubble_energy(n, 1.0);
    csv.row({"K_n", std::to_string(n), fmt17(Kn), fmt17(std::pow(e.dirichlet, -1.0 / n)),
             "closed_form+quadrature", ""});
    csv.row({"K_n_pow_minus_n", std::to_string(n), fmt17(sobolev_Kn_pow_minus_n(n)),
             fmt17(e.dirichlet), "closed_form+quadrature", ""});
    auto G = gram_V(n, cfg.f0);
    csv.row({"gram_V00", std::to_string(n), "", fmt17(G[0][0]), "quadrature", ""});
    csv.row({"gram_V11", std::to_string(n), "", fmt17(G[1][1]), "quadrature", ""});
    csv.row({"kelvin_K", std::to_string(n), fmt17(kelvin_Kn(n)), "", "closed_form", ""});
    csv.row({"I3i_C", std::to_string(n),
             fmt17(std::pow(n * (n - 2.0), 0.5 * n) * sphere_volume(n - 1)),
             fmt17(I3i_constant(n)), "engine-derived", ""});
    if (n == 6) {
        KappaParams kp{cfg.f0, gs.u0, cfg.rho0, cfg.alpha};
        const double kap = kappa(kp);
        const double astar = critical_alpha(kp);
        std::string warn = cfg.alpha > astar ? "alpha_exceeds_critical" : "";
        csv.row({"kappa", "6", "", fmt17(kap), "quadrature", kap < 0.0 ? "negative" : warn});
        csv.row({"alpha_star", "6", "", fmt17(astar), "quadrature", ""});
        auto ks = engine_kappa_split(cfg.f0, gs.u0, cfg.rho0);
        csv.row({"kappa_rho_part_engine", "6", "", fmt17(ks.rho_part), "engine-derived", ""});
        csv.row({"kappa_coupling_engine", "6", "", fmt17(ks.coupling_coef), "engine-derived", ""});
    }
    json m;
    m["config"] = config_snapshot(cfg);
    m["outputs"] = {csv.path};
    m["u0"] = gs.u0;
    write_manifest(outdir + "/constants_manifest.json", m);
    return 0;
}

int cmd_ground_state(const std::string& cfg_path, const std::string& outdir) {
    ModelConfig cfg = load_model(cfg_path);
    GroundState gs = solve_ground_state(cfg);
    json m;
    m["config"] = config_snapshot(cfg);
    m["u0"] = gs.u0;
    m["stability_margin"] = gs.stability_margin;
    m["eps0"] = gs.eps0;
    write_manifest(outdir + "/ground_state.json", m);
    printf("u0 %s\nstability_margin %s\neps0 %s\n", fmt17(gs.u0).c_str(),
           fmt17(gs.stability_margin).c_str(), fmt17(gs.eps0).c_str());
    return 0;
}

int cmd_green_check(const std::string& cfg_path, const std::string& outdir) {
    ModelConfig cfg = load_model(cfg_path);
    const int n = cfg.n;
    const double f = f_radial(cfg, 0.0);
    const double delta = cfg.mu;
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
    CsvWriter csv(outdir + "/green_check.csv",
                  {"dist_over_delta", "a1_convolution", "a1_closed_form", "rel_err"});
    double worst = 0.0;
    for (int i = 1; i <= grid.N; ++i) {
        const double d = grid.r[i];
        if (d < 10.0 * delta || d > 100.0 * delta) continue;
        auto c = theta_asymptotic_coeffs(n, f, 1.0, d);
        const double rel = std::abs(F.a1[i] - c[0]) / std::abs(c[0]);
        if (d >= 20.0 * delta && d <= 50.0 * delta) worst = std::max(worst, rel);
        csv.row({fmt17(d / delta), fmt17(F.a1[i]), fmt17(c[0]), fmt17(rel)});
    }
    write_tensor_csv(outdir + "/theta_tensor.csv", F);
    json m;
    m["config"] = config_snapshot(cfg);
    m["worst_rel_err_20_50_delta"] = worst;
    m["outputs"] = {csv.path, outdir + "/theta_tensor.csv"};
    write_manifest(outdir + "/green_check_manifest.json", m);
    if (worst > 0.02) throw NumericalError("green-check exceeded the 2% far-field tolerance");
    return 0;
}

int cmd_reduce(const std::string& cfg_path, double t, const std::string& p_str,
               const std::string& outdir, int N_grid, bool dump_fields) {
    Timer timer;
    ModelConfig cfg = load_model(cfg_path);
    GroundState gs = solve_ground_state(cfg);
    ReductionOptions opt;
    if (N_grid > 0) opt.N_grid = N_grid;
    std::vector<double> p = parse_p(p_str, cfg.n);
    BackgroundProfile bg = make_background(cfg, gs, opt, std::max(t, 1.0));
    Reducer red(cfg, gs, bg, t, p, opt);
    ReductionState st = red.pingpong_outer();
    MonitorReport mon = red.pointwise_monitors(st);

    CsvWriter csv(outdir + "/lambdas.csv", {"i", "lambda"});
    for (int i = 0; i <= cfg.n; ++i) csv.row({std::to_string(i), fmt17(st.lambdas[i])});
    json m;
    m["config"] = config_snapshot(cfg);
    m["t"] = t;
    m["p"] = p;
    m["diagnostics"] = diag_to_json(st);
    m["monitors"] = {{"sup_ratio", mon.sup_ratio},
                     {"far_field_sup", mon.far_field_sup},
                     {"far_field_bound", mon.far_field_bound},
                     {"far_field_constant", mon.far_field_constant},
                     {"grad_ratio", mon.grad_ratio},
                     {"min_uk", mon.min_uk},
                     {"eps0", mon.eps0},
                     {"truncation_active", mon.truncation_active}};
    m["elapsed_seconds"] = timer.seconds();
    m["outputs"] = {csv.path};
    if (dump_fields) {
        write_field_csv(outdir + "/phi.csv", st.phi);
        write_field_csv(outdir + "/v.csv", st.v);
        m["outputs"].push_back(outdir + "/phi.csv");
        m["outputs"].push_back(outdir + "/v.csv");
    }
    write_manifest(outdir + "/reduce_manifest.json", m);
    for (int i = 0; i <= cfg.n; ++i) printf("lambda_%d %s\n", i, fmt17(st.lambdas[i]).c_str());
    return 0;
}

int cmd_sweep(const std::string& cfg_path, const std::string& mu_list, double t,
              const std::string& p_str, const std::string& t_list, const std::string& outdir,
              int workers, int N_grid) {
    Timer timer;
    ModelConfig cfg = load_model(cfg_path);
    std::vector<double> mus = parse_list(mu_list);
    if (mus.empty()) throw ConfigError("sweep: empty mu list");
    ReductionOptions opt;
    if (N_grid > 0) opt.N_grid = N_grid;
    std::vector<double> p = parse_p(p_str, cfg.n);

    if (!t_list.empty()) {
        // (t, p) grid mode: lambda_0 rows over the grid and, when the grid
        // brackets a sign change, a located-zero row per scale
        std::vector<double> ts = parse_list(t_list);
        if (ts.size() < 2) throw ConfigError("sweep: --t-list needs at least two values");
        CsvWriter csv(outdir + "/sweep.csv",
                      {"name", "n", "mu", "closed_form", "quadrature", "pipeline", "rel_err",
                       "order"});
        json m;
        m["config"] = config_snapshot(cfg);
        bool zero_found_all = true;
        for (double mu : mus) {
            ModelConfig c = config_with_mu(cfg, mu);
            GroundState gs = solve_ground_state(c);
            BackgroundProfile bg =
                make_background(c, gs, opt, *std::max_element(ts.begin(), ts.end()));
            std::vector<double> lam(ts.size());
            for (size_t j = 0; j < ts.size(); ++j) {
                ReductionState st = run_reduction(c, gs, bg, ts[j], p, opt);
                lam[j] = st.lambdas[0];
                csv.row({"lambda0_at_t=" + fmt17(ts[j]), std::to_string(cfg.n), fmt17(mu),
                         "nan", "nan", fmt17(lam[j]), "nan", "nan"});
            }
            int bracket = -1;
            for (size_t j = 1; j < ts.size(); ++j)
                if (lam[j - 1] * lam[j] < 0.0) bracket = static_cast<int>(j);
            if (bracket < 0) {
                zero_found_all = false;
                continue;
            }
            ZeroResult zr = find_zero(c, gs, bg, opt,
                                      0.5 * (ts[bracket - 1] + ts[bracket]), p);
            csv.row({"zero_t_star", std::to_string(cfg.n), fmt17(mu), "nan", "nan",
                     fmt17(zr.t_star), fmt17(zr.residual_norm), "nan"});
            m["zeros"][fmt17(mu)] = {{"t_star", zr.t_star},
                                     {"interior", zr.t_star > 1.0 / opt.D &&
                                                      zr.t_star < opt.D},
                                     {"certificate", zr.certificate}};
        }
        m["elapsed_seconds"] = timer.seconds();
        m["outputs"] = {csv.path};
        write_manifest(outdir + "/sweep_manifest.json", m);
        if (!zero_found_all)
            throw RegimeError("sweep: no sign change of lambda_0 inside the t grid");
        return 0;
    }
    

    json m;
    m["config"] = config_snapshot(cfg);
    CsvWriter csv(outdir + "/sweep.csv",
                  {"name", "n", "mu", "closed_form", "quadrature", "pipeline", "rel_err",
                   "order"});
    if (mus.size() >= 3) {
        auto cs = convergence_study(cfg, mus, t, p, opt, workers);
        bool all_monotone = true;
        for (auto& r : cs.rows) {
            const double ord =
                cs.fitted_order.count(r.name) ? cs.fitted_order[r.name] : std::nan("");
            csv.row({r.name, std::to_string(cfg.n), fmt17(r.mu), fmt17(r.closed_form),
                     fmt17(r.quadrature), fmt17(r.pipeline), fmt17(r.rel_err), fmt17(ord)});
        }
        for (auto& [name, mono] : cs.monotone) {
            m["fitted_order"][name] = cs.fitted_order[name];
            m["monotone"][name] = mono;
            if (!mono) all_monotone = false;
        }
        m["elapsed_seconds"] = timer.seconds();
        m["outputs"] = {csv.path};
        write_manifest(outdir + "/sweep_manifest.json", m);
        if (!all_monotone)
            throw RegimeError("sweep: a relative-error series failed to decrease monotonically");
    } else {
        for (double mu : mus) {
            ModelConfig c = config_with_mu(cfg, mu);
            GroundState gs = solve_ground_state(c);
            BackgroundProfile bg = make_background(c, gs, opt, t);
            Reducer red(c, gs, bg, t, p, opt);
            ReductionState st = red.pingpong_outer();
            LeadingParams lp = make_leading_params(c, gs, bg, t, p);
            const double lead = predicted_lambda0(lp);
            csv.row({"lambda0", std::to_string(cfg.n), fmt17(mu), fmt17(lead), "nan",
                     fmt17(st.lambdas[0]),
                     fmt17(std::abs(st.lambdas[0] - lead) / std::max(1e-300, std::abs(lead))),
                     "nan"});
        }
        m["warning"] = "fewer than 3 scales: no fitted orders";
        m["elapsed_seconds"] = timer.seconds();
        m["outputs"] = {csv.path};
        write_manifest(outdir + "/sweep_manifest.json", m);
        fprintf(stderr, "warning: fewer than 3 scales, no fitted orders\n");
    }
    return 0;
}

int cmd_zero_find(const std::string& cfg_path, const std::string& p_str, const std::string& outdir,
                  int N_grid) {
    Timer timer;
    ModelConfig cfg = load_model(cfg_path);
    GroundState gs = solve_ground_state(cfg);
    ReductionOptions opt;
    if (N_grid > 0) opt.N_grid = N_grid;
    std::vector<double> p = parse_p(p_str, cfg.n);
    BackgroundProfile bg = make_background(cfg, gs, opt, opt.D);
    LeadingParams lp = make_leading_params(cfg, gs, bg, 1.0, p);
    double t0;
    if (cfg.n == 6) {
        auto ks = engine_kappa_split(lp.f_center, lp.u_center, cfg.rho0);
        t0 = solve_t0(lp, ks.rho_part);
    } else {
        t0 = solve_t0(lp);
    }
    ZeroResult zr = find_zero(cfg, gs, bg, opt, t0, p);
    json m;
    m["config"] = config_snapshot(cfg);
    m["t0_seed"] = t0;
    m["t_star"] = zr.t_star;
    m["p_star"] = zr.p_star;
    m["residual_norm"] = zr.residual_norm;
    m["seed_norm"] = zr.seed_norm;
    m["certificate_max_uk"] = zr.certificate;
    m["pipeline_runs"] = zr.pipeline_runs;
    m["elapsed_seconds"] = timer.seconds();
    write_manifest(outdir + "/zero_find.json", m);
    printf("t0_seed %s\nt_star %s\nresidual %s\ncertificate %d\n", fmt17(t0).c_str(),
           fmt17(zr.t_star).c_str(), fmt17(zr.residual_norm).c_str(), (int)zr.certificate);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"blowup: finite-dimensional reduction engine for coupled critical systems"};
    app.require_subcommand(1);

    std::string cfg_path, outdir = ".", p_str, mu_list, t_list;
    double t = 1.0;
    int workers = 1, N_grid = 0;
    bool dump_fields = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", cfg_path, "config file (flat JSON)")->required();
        sub->add_option("--out", outdir, "output directory");
        sub->add_option("--grid", N_grid, "radial grid size override");
    };

    auto* c1 = app.add_subcommand("constants", "closed-form and quadrature constants table");
    add_common(c1);
    auto* c2 = app.add_subcommand("ground-state", "background root and stability margin");
    add_common(c2);
    auto* c3 = app.add_subcommand("green-check", "Kelvin response vs far-field law");
    add_common(c3);
    auto* c4 = app.add_subcommand("reduce", "one (t,p) reduction run");
    add_common(c4);
    c4->add_option("--t", t, "shape parameter in [1/D, D]");
    c4->add_option("--p", p_str, "center offset p (comma separated)");
    c4->add_flag("--dump-fields", dump_fields, "write phi/v field CSVs");
    auto* c5 = app.add_subcommand("sweep", "mu sweep with expansion report");
    add_common(c5);
    c5->add_option("--mu-list", mu_list, "comma separated mu values")->required();
    c5->add_option("--t", t, "shape parameter");
    c5->add_option("--t-list", t_list, "t grid; adds lambda_0 rows and a located-zero row");
    c5->add_option("--p", p_str, "center offset p");
    c5->add_option("--workers", workers, "worker count");
    auto* c6 = app.add_subcommand("zero-find", "locate the zero of the reduced map");
    add_common(c6);
    c6->add_option("--p", p_str, "center offset p");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c1->parsed()) return cmd_constants(cfg_path, outdir);
        if (c2->parsed()) return cmd_ground_state(cfg_path, outdir);
        if (c3->parsed()) return cmd_green_check(cfg_path, outdir);
        if (c4->parsed()) return cmd_reduce(cfg_path, t, p_str, outdir, N_grid, dump_fields);
        if (c5->parsed()) return cmd_sweep(cfg_path, mu_list, t, p_str, t_list, outdir, workers, N_grid);
        if (c6->parsed()) return cmd_zero_find(cfg_path, p_str, outdir, N_grid);
    } catch (const ConfigError& e) {
        fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const RegimeError& e) {
        fprintf(stderr, "regime failure: %s\n", e.what());
        return 3;
    } catch (const NumericalError& e) {
        fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        fprintf(stderr, "failure: %s\n", e.what());
        return 4;
    }
    return 0;
}
