#include "blowup/grid.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>

namespace blowup {

RadialGrid RadialGrid::make(int n, double r_max, double delta_resolve, int N_interior) {
    if (!(r_max > 0.0) || !(delta_resolve > 0.0) || N_interior < 16)
        throw ConfigError("RadialGrid: invalid parameters");
    RadialGrid g;
    g.n = n;
    g.N = N_interior;
    g.r_max = r_max;
    g.dg = delta_resolve / 8.0;
    g.a = std::log(1.0 + r_max / g.dg);
    auto map = [&](double s) { return g.dg * (std::exp(g.a * s) - 1.0); };
    const double ds = 1.0 / (g.N + 1);
    g.r.resize(g.N + 2);
    for (int i = 0; i <= g.N + 1; ++i) g.r[i] = map(i * ds);
    g.r[g.N + 1] = r_max;
    g.r_edge.resize(g.N + 1);
    for (int i = 0; i <= g.N; ++i) g.r_edge[i] = map((i + 0.5) * ds);
    g.w.resize(g.N + 2);
    auto vol = [&](double rr) { return std::pow(rr, n) / n; };
    g.w[0] = vol(g.r_edge[0]);
    for (int i = 1; i <= g.N; ++i) g.w[i] = vol(g.r_edge[i]) - vol(g.r_edge[i - 1]);
    g.w[g.N + 1] = vol(r_max) - vol(g.r_edge[g.N]);
    // Gregory end-corrected trapezoid in the mapped coordinate: 4th order
    // for smooth integrands, any node count
    g.wq.assign(g.N + 2, 0.0);
    {
        const double c[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
        for (int i = 0; i <= g.N + 1; ++i) {
            double ci = 1.0;
            const int dl = i, dr = g.N + 1 - i;
            if (std::min(dl, dr) < 3) ci = c[std::min(dl, dr)];
            const double jac = g.dg * g.a * std::exp(g.a * i * ds);  // dr/dsigma
            g.wq[i] = ci * ds * jac * std::pow(g.r[i], n - 1);
        }
    }
    // sanity: at least 8 nodes below the resolved scale
    int below = 0;
    for (int i = 1; i <= g.N; ++i)
        if (g.r[i] < delta_resolve) ++below;
    if (below < 8) throw ConfigError("RadialGrid: fewer than 8 nodes below the resolved scale");
    return g;
}

int RadialGrid::nearest(double s) const {
    int best = 0;
    double dbest = std::abs(r[0] - s);
    for (int i = 1; i <= N + 1; ++i) {
        double d = std::abs(r[i] - s);
        if (d < dbest) {
            dbest = d;
            best = i;
        }
    }
    return best;
}

namespace {

// Gauss nodes/weights for weight (1-x)^al (1+x)^be on (-1,1), Golub-Welsch.
void gauss_jacobi(int m, double al, double be, std::vector<double>& x, std::vector<double>& w) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        const double s = 2.0 * k + al + be;
        double ak;
        if (k == 0 && al + be == 0.0) ak = (be - al) / 2.0 * 0.0;
        else ak = (be * be - al * al) / (s * (s + 2.0));
        J(k, k) = ak;
        if (k > 0) {
            double bk2;
            if (k == 1 && al + be == 0.0)
                bk2 = 4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + al + be) * (2.0 + al + be) *
                                                       (3.0 + al + be));
            else
                bk2 = 4.0 * k * (k + al) * (k + be) * (k + al + be) /
                      (s * s * (s + 1.0) * (s - 1.0));
            const double b = std::sqrt(bk2);
            J(k, k - 1) = b;
            J(k - 1, k) = b;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double mu0 = std::pow(2.0, al + be + 1.0) * std::tgamma(al + 1.0) *
                       std::tgamma(be + 1.0) / std::tgamma(al + be + 2.0);
    x.resize(m);
    w.resize(m);
    for (int k = 0; k < m; ++k) {
        x[k] = es.eigenvalues()(k);
        const double v = es.eigenvectors()(0, k);
        w[k] = mu0 * v * v;
    }
}

}  // namespace

AngularRule AngularRule::make(int n, int m, int points, int azimuthal) {
    AngularRule rule;
    rule.n = n;
    rule.m = m;
    const double total = sphere_volume(n - 1);
    if (m == 0) {
        rule.x.push_back({0.0, 0.0});
        rule.w.push_back(total);
        return rule;
    }
    if (m == 1) {
        // int_{S^{n-1}} g(w.a) dw = w_{n-2} int_{-1}^1 g(c) (1-c^2)^{(n-3)/2} dc
        std::vector<double> c, lw;
        const double lam = 0.5 * (n - 3);
        gauss_jacobi(points, lam, lam, c, lw);
        const double pref = sphere_volume(n - 2);
        for (int k = 0; k < points; ++k) {
            rule.x.push_back({c[k], 0.0});
            rule.w.push_back(pref * lw[k]);
        }
        return rule;
    }
    if (m == 2) {
        // int g(w.a, w.b) dw = w_{n-3} int_disk g(x) (1-|x|^2)^{(n-4)/2} dx,
        // polar form with t = rho^2: (1/2) (1-t)^{(n-4)/2} dt dpsi.
        std::vector<double> t, tw;
        gauss_jacobi(points, 0.5 * (n - 4), 0.0, t, tw);  // on (-1,1), map to (0,1)
        const double pref = sphere_volume(n - 3);
        for (int k = 0; k < points; ++k) {
            const double tk = 0.5 * (t[k] + 1.0);
            const double wk = tw[k] * std::pow(0.5, 0.5 * (n - 4) + 1.0);
            const double rho = std::sqrt(tk);
            for (int j = 0; j < azimuthal; ++j) {
                const double psi = 2.0 * M_PI * (j + 0.5) / azimuthal;
                rule.x.push_back({rho * std::cos(psi), rho * std::sin(psi)});
                rule.w.push_back(pref * 0.5 * wk * 2.0 * M_PI / azimuthal);
            }
        }
        return rule;
    }
    throw ConfigError("AngularRule: m must be 0, 1 or 2");
}

HarmonicField& HarmonicField::axpy(double s, const HarmonicField& o) {
    for (size_t i = 0; i < l0.size(); ++i) l0[i] += s * o.l0[i];
    for (int a = 0; a < axes(); ++a)
        for (size_t i = 0; i < l1[a].size(); ++i) l1[a][i] += s * o.l1[a][i];
    return *this;
}

HarmonicField& HarmonicField::scale(double s) {
    for (auto& v : l0) v *= s;
    for (auto& c : l1)
        for (auto& v : c) v *= s;
    return *this;
}

AngularProjector::AngularProjector(const AngularRule& r) : rule(&r) {
    double tot = 0.0;
    for (double wk : r.w) tot += wk;
    inv_total = 1.0 / tot;
}

std::array<double, 3> AngularProjector::project(const std::vector<double>& vals) const {
    double m0 = 0.0, mx = 0.0, my = 0.0;
    for (int k = 0; k < rule->size(); ++k) {
        m0 += rule->w[k] * vals[k];
        mx += rule->w[k] * vals[k] * rule->x[k][0];
        my += rule->w[k] * vals[k] * rule->x[k][1];
    }
    const int n = rule->n;
    return {m0 * inv_total, n * mx * inv_total, n * my * inv_total};
}

void write_field_csv(const std::string& path, const HarmonicField& f) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path);
    out << "r,mode,component,value\n";
    char buf[64];
    auto fmt = [&](double v) {
        snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    const auto& g = *f.grid;
    for (int i = 0; i < g.size(); ++i)
        out << fmt(g.r[i]) << ",0,0," << fmt(f.l0[i]) << "\n";
    for (int a = 0; a < f.axes(); ++a)
        for (int i = 0; i < g.size(); ++i)
            out << fmt(g.r[i]) << ",1," << a + 1 << "," << fmt(f.l1[a][i]) << "\n";
}

}  // namespace blowup
