#include "blowup/vector_green.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace blowup {

namespace {

double vnorm(const std::vector<double>& y) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return std::sqrt(s);
}

// 12-point Gauss-Legendre
constexpr int kGn = 12;
constexpr double kGx[kGn] = {-0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
                             -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
                             0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
                             0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
constexpr double kGw[kGn] = {0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
                             0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
                             0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
                             0.1600783285433462, 0.1069393259953184, 0.0471753363865118};

}  // namespace

std::vector<double> kelvin_green(int n, const std::vector<double>& y, int i) {
    if (i < 1 || i > n) throw ConfigError("kelvin_green: axis out of range");
    const double r = vnorm(y);
    if (r == 0.0) throw ConfigError("kelvin_green: y must be nonzero");
    const double pref = -std::pow(r, 2.0 - n) / (4.0 * (n - 1.0) * sphere_volume(n - 1));
    std::vector<double> out(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double v = (j == i - 1) ? (3.0 * n - 2.0) : 0.0;
        v += (n - 2.0) * y[i - 1] * y[j] / (r * r);
        out[j] = pref * v;
    }
    return out;
}

std::vector<double> kelvin_green_exact(int n, const std::vector<double>& y, int i) {
    if (i < 1 || i > n) throw ConfigError("kelvin_green_exact: axis out of range");
    const double r = vnorm(y);
    if (r == 0.0) throw ConfigError("kelvin_green_exact: y must be nonzero");
    const double pref =
        std::pow(r, 2.0 - n) / (4.0 * (n - 1.0) * (n - 2.0) * sphere_volume(n - 1));
    std::vector<double> out(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double v = (j == i - 1) ? (3.0 * n - 2.0) : 0.0;
        v += (n - 2.0) * (n - 2.0) * y[i - 1] * y[j] / (r * r);
        out[j] = pref * v;
    }
    return out;
}

double kelvin_lg_coefficient(int n) { return n / (2.0 * (n - 1.0) * sphere_volume(n - 1)); }

double LgTField::trace_ratio(int i) const {
    const int n = grid->n;
    const double tr = 2.0 * a1[i] + a2[i] + n * a3[i];
    const double sc = std::sqrt(std::max(frob2(i, {1.0, 0.0}), 1e-300));
    return std::abs(tr) / std::max(sc, 1e-300);
}

LgTField& LgTField::axpy(double s, const LgTField& o) {
    for (size_t i = 0; i < a1.size(); ++i) {
        a1[i] += s * o.a1[i];
        a2[i] += s * o.a2[i];
        a3[i] += s * o.a3[i];
    }
    return *this;
}

KelvinTable KelvinTable::build(const RadialGrid& grid) {
    KelvinTable T;
    T.grid_ = &grid;
    const int n = grid.n;
    const int m = grid.size();
    T.stride_ = m;
    T.k1_.assign(static_cast<size_t>(m) * m, 0.0);
    T.k2_.assign(static_cast<size_t>(m) * m, 0.0);
    T.k3_.assign(static_cast<size_t>(m) * m, 0.0);
    const double kap = kelvin_lg_coefficient(n);
    const double wang = sphere_volume(n - 2);
    const double lam = 0.5 * (n - 3);

    // polar integral over c in (-1,1) with weight (1-c^2)^lam of the three
    // tensor contractions; panels refined toward c = 1 when rho ~ d
    auto polar = [&](double d, double rho, double out[3]) {
        out[0] = out[1] = out[2] = 0.0;
        const double dr2 = (d - rho) * (d - rho);
        double smin = std::max(dr2 / (2.0 * d * rho + 1e-300), 1e-15);
        smin = std::min(smin, 2.0);
        // panel boundaries in u = 1-c: geometric from 2 down to smin, plus
        // the smooth remainder and the negative-c half
        std::vector<double> knots{2.0};
        double u = 2.0;
        while (u > 4.0 * smin) {
            u *= 0.25;
            knots.push_back(u);
        }
        knots.push_back(0.0);
        for (size_t kp = 0; kp + 1 < knots.size(); ++kp) {
            const double ua = knots[kp + 1], ub = knots[kp];
            const double cmid = 0.5 * (ub + ua), chal = 0.5 * (ub - ua);
            for (int g = 0; g < kGn; ++g) {
                const double uu = cmid + chal * kGx[g];
                const double c = 1.0 - uu;
                const double one_m_c2 = uu * (2.0 - uu);
                if (one_m_c2 <= 0.0) continue;
                const double L2 = d * d + rho * rho - 2.0 * d * rho * c;
                if (L2 <= 0.0) continue;
                const double L = std::sqrt(L2);
                const double n1 = (d - rho * c) / L;
                const double t2 = rho * rho * one_m_c2 / ((n - 1.0) * L2);
                const double w = kGw[g] * chal * std::pow(one_m_c2, lam) * kap *
                                 std::pow(L, 1.0 - n);
                out[0] += w * (-n1 - (n - 2.0) * n1 * n1 * n1);      // A11
                out[1] += w * (n1 - (n - 2.0) * n1 * t2);            // A22
                out[2] += w * (-n1 - (n - 2.0) * n1 * t2);           // A12
            }
        }
        out[0] *= wang;
        out[1] *= wang;
        out[2] *= wang;
    };

    for (int i = 1; i < m; ++i) {  // target node (d = 0 gives zero tensor)
        const double d = grid.r[i];
        for (int j = 0; j < m; ++j) {
            double rho = grid.r[j];
            if (j == 0) rho = 0.5 * grid.r_edge[0];  // center cell representative
            double A[3];
            polar(d, rho, A);
            const size_t id = static_cast<size_t>(i) * m + j;
            const double a12 = A[2], a22 = A[1];
            T.k1_[id] = a12;                        // -> a1
            T.k2_[id] = A[0] - 2.0 * a12 - a22;     // -> a2
            T.k3_[id] = a22;                        // -> a3
        }
    }
    return T;
}

LgTField KelvinTable::convolve(const std::vector<double>& q,
                               const std::array<double, 2>& zeta) const {
    const auto& g = *grid_;
    if (static_cast<int>(q.size()) != g.size())
        throw ConfigError("KelvinTable::convolve: source size mismatch");
    LgTField out(g);
    out.zeta = zeta;
    for (int i = 1; i < g.size(); ++i) {
        double s1 = 0.0, s2 = 0.0, s3 = 0.0;
        const size_t off = static_cast<size_t>(i) * stride_;
        for (int j = 0; j < g.size(); ++j) {
            const double src = g.wq[j] * q[j];
            if (src == 0.0) continue;
            s1 += k1_[off + j] * src;
            s2 += k2_[off + j] * src;
            s3 += k3_[off + j] * src;
        }
        out.a1[i] = s1;
        out.a2[i] = s2;
        out.a3[i] = s3;
    }
    return out;
}

void write_tensor_csv(const std::string& path, const LgTField& f) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path);
    out << "r,mode,i,j,value\n";
    char buf[64];
    auto fmt = [&](double v) {
        snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    const auto& g = *f.grid;
    const int n = g.n;
    // reconstruct T_ij at x = r e_1 with the coupling direction embedded in
    // the (e_1, e_2) active plane
    for (int idx = 0; idx < g.size(); ++idx) {
        const double s = f.zeta[0];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double zi = (i == 0) ? f.zeta[0] : (i == 1 ? f.zeta[1] : 0.0);
                double zj = (j == 0) ? f.zeta[0] : (j == 1 ? f.zeta[1] : 0.0);
                double mi = i == 0 ? 1.0 : 0.0, mj = j == 0 ? 1.0 : 0.0;
                const double v = f.a1[idx] * (mi * zj + zi * mj) +
                                 f.a2[idx] * s * mi * mj + (i == j ? f.a3[idx] * s : 0.0);
                if (v != 0.0 || (i < 2 && j < 2))
                    out << fmt(g.r[idx]) << ",0," << i << "," << j << "," << fmt(v) << "\n";
            }
    }
}

std::array<double, 3> theta_asymptotic_coeffs(int n, double f_center, double X_center_norm,
                                              double dist) {
    const double mag = kelvin_Kn(n) * std::pow(f_center, -0.5 * n) * X_center_norm *
                       std::pow(dist, 1.0 - n);
    return {-mag, -(n - 2.0) * mag, mag};
}

std::vector<std::vector<double>> theta_asymptotic(int n, double f_center, double X_center_norm,
                                                  const std::vector<double>& zeta,
                                                  const std::vector<double>& xhat, double dist) {
    const auto c = theta_asymptotic_coeffs(n, f_center, X_center_norm, dist);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += zeta[i] * xhat[i];
    std::vector<std::vector<double>> T(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            T[i][j] = c[0] * (xhat[i] * zeta[j] + zeta[i] * xhat[j]) +
                      c[1] * s * xhat[i] * xhat[j] + (i == j ? c[2] * s : 0.0);
        }
    return T;
}

LTBoundsReport verify_LT_bounds(const LgTField& diff, double delta, double X_center, double X_inf,
                                double grad_X, double eps_k) {
    const auto& g = *diff.grid;
    LTBoundsReport rep;
    const double S = X_center + delta * grad_X;
    const int n = g.n;
    for (int i = 1; i < g.size(); ++i) {
        const double mag = std::sqrt(std::max(
            std::max(diff.frob2(i, {1.0, 0.0}), diff.frob2(i, {0.0, 1.0})),
            diff.frob2(i, {std::sqrt(0.5), std::sqrt(0.5)})));
        const double th = delta + g.r[i];
        rep.sup_weighted =
            std::max(rep.sup_weighted, mag * std::min(1.0, std::pow(th, n - 1.0) / S));
        const double envelope = S * std::pow(th, 1.0 - n) + X_inf * eps_k;
        rep.best_C = std::max(rep.best_C, mag / envelope);
        if (g.r[i] > 10.0 * std::sqrt(delta)) rep.far_field = std::max(rep.far_field, mag);
        rep.trace_max = std::max(rep.trace_max, diff.trace_ratio(i));
    }
    return rep;
}

}  // namespace blowup
