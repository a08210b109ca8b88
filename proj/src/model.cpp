#include "blowup/model.hpp"

#include <cmath>
#include <sstream>

namespace blowup {

namespace {

double mu_from_tau(int n, double tau) {
    if (n == 6) return tau;
    if (n <= 10) return std::pow(tau, 2.0 / (n - 6));
    return std::sqrt(tau);
}

double get(const std::map<std::string, double>& raw, const std::string& key, double dflt,
           bool* present = nullptr) {
    auto it = raw.find(key);
    if (present) *present = (it != raw.end());
    if (it == raw.end()) return dflt;
    if (!std::isfinite(it->second)) throw ConfigError("config key '" + key + "' is not finite");
    return it->second;
}

}  // namespace

ModelConfig make_model(const std::map<std::string, double>& raw, const std::vector<double>& zdir) {
    ModelConfig cfg;
    cfg.n = static_cast<int>(get(raw, "n", 7));
    cfg.tau = get(raw, "tau", 1e-3);
    cfg.f0 = get(raw, "f0", 1.0);
    cfg.s_bump = get(raw, "s_bump", 0.0);
    cfg.h0 = get(raw, "h0", 0.0);
    cfg.rho0 = get(raw, "rho0", 0.0);
    cfg.alpha = get(raw, "alpha", 0.0);
    cfg.weyl_sq = get(raw, "weyl_sq", 0.0);
    cfg.beta_exponent = get(raw, "beta_exponent", 0.75);
    cfg.beta_coef = get(raw, "beta_coef", 1.0);
    cfg.rcut_exponent = get(raw, "rcut_exponent", 4.0);

    bool has_mu = false, has_tau = raw.count("tau") > 0;
    double mu_in = get(raw, "mu", 0.0, &has_mu);
    if (has_mu && !has_tau) {
        // invert the sequence law
        cfg.mu = mu_in;
        if (cfg.n == 6) cfg.tau = mu_in;
        else if (cfg.n <= 10) cfg.tau = std::pow(mu_in, 0.5 * (cfg.n - 6));
        else cfg.tau = mu_in * mu_in;
    } else {
        cfg.mu = mu_from_tau(cfg.n, cfg.tau);
        if (has_mu && std::abs(mu_in - cfg.mu) > 1e-12 * std::max(1.0, cfg.mu))
            throw ConfigError("sequence law violated: mu inconsistent with tau for n=" +
                              std::to_string(cfg.n));
    }

    bool has_beta = false, has_rcut = false;
    double beta_in = get(raw, "beta", 0.0, &has_beta);
    double rcut_in = get(raw, "rcut", 0.0, &has_rcut);
    cfg.beta = has_beta ? beta_in : cfg.beta_coef * std::pow(cfg.mu, cfg.beta_exponent);
    cfg.r_cut = has_rcut ? rcut_in : std::pow(cfg.mu, 1.0 / cfg.rcut_exponent);

    cfg.zdir.assign(cfg.n, 0.0);
    if (!zdir.empty()) {
        if (static_cast<int>(zdir.size()) != cfg.n)
            throw ConfigError("zdir must have dimension n");
        double nrm = 0.0;
        for (double z : zdir) nrm += z * z;
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) throw ConfigError("zdir must be a nonzero direction");
        for (int i = 0; i < cfg.n; ++i) cfg.zdir[i] = zdir[i] / nrm;
    } else {
        cfg.zdir[0] = 1.0;
    }

    validate_model(cfg);
    return cfg;
}

void validate_model(const ModelConfig& cfg) {
    std::ostringstream err;
    if (cfg.n < 6 || cfg.n > 11) throw ConfigError("dimension out of range: n must be in [6,11]");
    if (!(cfg.f0 > 0.0)) throw ConfigError("f0 must be positive (focusing case)");
    if (!(cfg.rho0 > 0.0)) throw ConfigError("rho0 must be positive");
    if (!(cfg.tau > 0.0)) throw ConfigError("tau must be positive");
    if (!(cfg.h0 > 0.0)) throw ConfigError("h0 must be positive for a coercive background");
    if (cfg.alpha < 0.0) throw ConfigError("alpha must be nonnegative");
    if (cfg.weyl_sq < 0.0) throw ConfigError("weyl_sq must be nonnegative");
    if (!(cfg.mu < cfg.beta && cfg.beta < cfg.r_cut)) {
        err << "scale ordering violated: need mu < beta < r_cut, got mu=" << cfg.mu
            << " beta=" << cfg.beta << " r_cut=" << cfg.r_cut;
        throw ConfigError(err.str());
    }
    if (cfg.n == 6 && !(cfg.beta * cfg.beta < cfg.mu)) {
        err << "n=6 ordering violated: need beta^2 < mu, got beta^2=" << cfg.beta * cfg.beta
            << " mu=" << cfg.mu;
        throw ConfigError(err.str());
    }
    if (cfg.n == 6 && !(cfg.h0 > cfg.tau))
        throw ConfigError("n=6 potential h0 - tau H must stay positive: need h0 > tau");
}

double background_g(const ModelConfig& cfg, double u) {
    const double p = cfg.crit();
    return cfg.f0 * std::pow(u, p - 1.0) + cfg.rho0 * std::pow(u, -p - 1.0) - cfg.h0 * u;
}

double background_g_d1(const ModelConfig& cfg, double u) {
    const double p = cfg.crit();
    return cfg.f0 * (p - 1.0) * std::pow(u, p - 2.0) -
           cfg.rho0 * (p + 1.0) * std::pow(u, -p - 2.0) - cfg.h0;
}

GroundState solve_ground_state(const ModelConfig& cfg) {
    if (!(cfg.rho0 > 0.0)) throw ConfigError("solve_ground_state requires rho0 > 0");
    // g -> +inf at 0+ and +inf; scan a log grid for the first sign change.
    const int m = 2000;
    double lo = -1.0, hi = -1.0;
    double uprev = 1e-6, gprev = background_g(cfg, uprev);
    for (int i = 1; i <= m; ++i) {
        double u = 1e-6 * std::pow(1e7, double(i) / m);  // up to 10
        double g = background_g(cfg, u);
        if (gprev > 0.0 && g <= 0.0) {
            lo = uprev;
            hi = u;
            break;
        }
        uprev = u;
        gprev = g;
    }
    if (lo < 0.0)
        throw RegimeError(
            "no positive background root: g(u) > 0 for all u (data outside the existence regime)");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (background_g(cfg, mid) > 0.0) lo = mid;
        else hi = mid;
    }
    GroundState gs;
    gs.u0 = 0.5 * (lo + hi);
    const double p = cfg.crit();
    gs.stability_margin = cfg.h0 - (p - 1.0) * cfg.f0 * std::pow(gs.u0, p - 2.0) +
                          (p + 1.0) * cfg.rho0 * std::pow(gs.u0, -p - 2.0);
    if (!(gs.stability_margin > 0.0))
        throw RegimeError("minimal-root search failed: stability margin non-positive");
    // eps0: positive root of h_max u = rho0 u^{-2*-1} / 2.
    gs.eps0 = std::pow(cfg.rho0 / (2.0 * cfg.h_max()), 1.0 / (p + 2.0));
    return gs;
}

double h_bump_radial(const ModelConfig& cfg, double r) {
    const double sgn = cfg.n >= 7 ? 1.0 : -1.0;
    return sgn * cfg.tau * bump_H(r / cfg.beta).v;
}

double f_radial(const ModelConfig& cfg, double r) {
    return cfg.f0 + cfg.s_bump * plateau_chi(r / cfg.r_cut).v;
}

double f_radial_d1(const ModelConfig& cfg, double r) {
    return cfg.s_bump * plateau_chi(r / cfg.r_cut).d1 / cfg.r_cut;
}

double x_amplitude_radial(const ModelConfig& cfg, double r) {
    return cfg.alpha * std::pow(cfg.mu, 0.5 * (cfg.n - 1)) * bump_zdir(r / cfg.r_cut).v;
}

CoefficientValues eval_coefficients(const ModelConfig& cfg, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != cfg.n)
        throw ConfigError("eval_coefficients: point dimension mismatch");
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    const double r = std::sqrt(r2);
    CoefficientValues out;
    out.h_bump = h_bump_radial(cfg, r);
    out.f = f_radial(cfg, r);
    out.grad_f.assign(cfg.n, 0.0);
    out.X.assign(cfg.n, 0.0);
    const double df = f_radial_d1(cfg, r);
    const double xa = x_amplitude_radial(cfg, r);
    for (int i = 0; i < cfg.n; ++i) {
        if (r > 0.0) out.grad_f[i] = df * x[i] / r;
        out.X[i] = xa * cfg.zdir[i];
    }
    return out;
}

}  // namespace blowup
