#include "blowup/elliptic.hpp"

#include <cmath>

namespace blowup {

namespace {

double edge_coef(const RadialGrid& g, int e) {
    // conductance of the edge between nodes e and e+1
    return std::pow(g.r_edge[e], g.n - 1) / (g.r[e + 1] - g.r[e]);
}

}  // namespace

ModeOperator::ModeOperator(const RadialGrid& grid, int l, const std::vector<double>& potential)
    : grid_(&grid), l_(l), pot_(potential) {
    if (l != 0 && l != 1) throw ConfigError("ModeOperator: l must be 0 or 1");
    if (static_cast<int>(potential.size()) != grid.size())
        throw ConfigError("ModeOperator: potential size mismatch");
    const int i0 = first_node();
    for (int i = i0; i <= grid.N; ++i) idx_.push_back(i);
    const int m = rows();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * m);
    const double lterm = l * (l + grid.n - 2.0);
    for (int k = 0; k < m; ++k) {
        const int i = idx_[k];
        double diag = grid.w[i] * (potential[i] + (l ? lterm / (grid.r[i] * grid.r[i]) : 0.0));
        // left edge (absent for the l=0 center cell)
        if (i > 0) {
            const double c = edge_coef(grid, i - 1);
            diag += c;
            if (i - 1 >= i0) {
                trip.emplace_back(k, k - 1, -c);
            }
        }
        // right edge (to Dirichlet boundary when i == N)
        {
            const double c = edge_coef(grid, i);
            diag += c;
            if (i + 1 <= grid.N) trip.emplace_back(k, k + 1, -c);
        }
        trip.emplace_back(k, k, diag);
    }
    S_.resize(m, m);
    S_.setFromTriplets(trip.begin(), trip.end());
    lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(S_);
    if (lu_->info() != Eigen::Success)
        throw RegimeError("coercivity loss: mode operator is singular");
}

Eigen::VectorXd ModeOperator::solve_raw(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = lu_->solve(b);
    if (lu_->info() != Eigen::Success)
        throw NumericalError("mode operator solve failed");
    return x;
}

std::vector<double> ModeOperator::solve(const std::vector<double>& g) const {
    const auto& gr = *grid_;
    Eigen::VectorXd b(rows());
    for (int k = 0; k < rows(); ++k) b(k) = gr.w[idx_[k]] * g[idx_[k]];
    Eigen::VectorXd x = solve_raw(b);
    // residual check in the weak norm
    Eigen::VectorXd res = S_ * x - b;
    const double nb = b.norm();
    if (nb > 0.0 && res.norm() > 1e-10 * nb)
        throw NumericalError("mode operator solve residual too large");
    std::vector<double> u(gr.size(), 0.0);
    for (int k = 0; k < rows(); ++k) u[idx_[k]] = x(k);
    return u;
}

std::vector<double> ModeOperator::apply(const std::vector<double>& u) const {
    const auto& gr = *grid_;
    Eigen::VectorXd x(rows());
    for (int k = 0; k < rows(); ++k) x(k) = u[idx_[k]];
    Eigen::VectorXd y = S_ * x;
    std::vector<double> out(gr.size(), 0.0);
    for (int k = 0; k < rows(); ++k) out[idx_[k]] = y(k) / gr.w[idx_[k]];
    return out;
}

double ModeOperator::form(const std::vector<double>& u, const std::vector<double>& v) const {
    Eigen::VectorXd xu(rows()), xv(rows());
    for (int k = 0; k < rows(); ++k) {
        xu(k) = u[idx_[k]];
        xv(k) = v[idx_[k]];
    }
    return xu.dot(S_ * xv);
}

double ModeOperator::max_asymmetry() const {
    Eigen::SparseMatrix<double> D = S_ - Eigen::SparseMatrix<double>(S_.transpose());
    double m = 0.0, s = 0.0;
    for (int k = 0; k < D.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(D, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    for (int k = 0; k < S_.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(S_, k); it; ++it)
            s = std::max(s, std::abs(it.value()));
    return s > 0.0 ? m / s : 0.0;
}

double stiffness_pair(const RadialGrid& g, int l, const std::vector<double>& u,
                      const std::vector<double>& v) {
    double acc = 0.0;
    const int e0 = (l == 0) ? 0 : 0;  // all edges; l=1 fields vanish at node 0
    for (int e = e0; e <= g.N; ++e) {
        const double c = edge_coef(g, e);
        acc += c * (u[e + 1] - u[e]) * (v[e + 1] - v[e]);
    }
    if (l == 1) {
        const double lterm = l * (l + g.n - 2.0);
        for (int i = 1; i <= g.N + 1; ++i)
            acc += lterm / (g.r[i] * g.r[i]) * u[i] * v[i] * g.w[i];
    }
    return acc;
}

double mass_pair(const RadialGrid& g, const std::vector<double>& u, const std::vector<double>& v) {
    double acc = 0.0;
    for (int i = 0; i < g.size(); ++i) acc += g.w[i] * u[i] * v[i];
    return acc;
}

std::vector<double> green_function(const ModeOperator& op, double r_source) {
    const auto& g = op.grid();
    const int j = g.nearest(r_source);
    if (j < op.first_node() || j > g.N)
        throw ConfigError("green_function: source outside the interior");
    Eigen::VectorXd b = Eigen::VectorXd::Zero(op.rows());
    b(j - op.first_node()) = 1.0;
    Eigen::VectorXd x = op.solve_raw(b);
    // the stored form is the radial reduction; the flux identity in R^n
    // carries the |S^{n-1}| factor
    const double scale = 1.0 / sphere_volume(g.n - 1);
    std::vector<double> G(g.size(), 0.0);
    for (int k = 0; k < op.rows(); ++k) G[op.first_node() + k] = scale * x(k);
    if (G[j] <= 0.0) throw RegimeError("coercivity loss: Green function not positive at source");
    return G;
}

double coercivity_margin(const ModeOperator& op, int max_iter, double tol) {
    const auto& g = op.grid();
    // Gershgorin-type lower bound: quadratic form >= min potential; recover
    // the shift from the diagonal minus edge sums is conservative enough.
    Eigen::VectorXd diagW(op.rows());
    for (int k = 0; k < op.rows(); ++k) diagW(k) = g.w[op.first_node() + k];
    // the quadratic form is bounded below by the minimum of the potential
    double minv = 1e300;
    for (int k = 0; k < op.rows(); ++k)
        minv = std::min(minv, op.potential()[op.first_node() + k]);
    const double shift = std::min(0.0, minv) - 1.0;
    const auto& S = op.matrix();
    // shifted operator S - shift M is SPD
    Eigen::SparseMatrix<double> M(op.rows(), op.rows());
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < op.rows(); ++k) trip.emplace_back(k, k, diagW(k));
    M.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseMatrix<double> A = S - shift * M;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw NumericalError("coercivity_margin: factorization failed");
    Eigen::VectorXd x = Eigen::VectorXd::Ones(op.rows());
    x /= std::sqrt(x.dot(M * x));
    double lam = 0.0, lam_prev = 1e300;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd y = lu.solve(M * x);
        y /= std::sqrt(y.dot(M * y));
        lam = y.dot(S * y) / y.dot(M * y);
        x = y;
        if (std::abs(lam - lam_prev) < tol * std::max(1.0, std::abs(lam))) return lam;
        lam_prev = lam;
    }
    throw NumericalError("coercivity_margin: inverse power iteration did not converge");
}

HarmonicField apply_Lu(const RadialGrid& grid, const std::vector<double>& h_tot,
                       const std::vector<double>& f, const std::vector<double>& rho,
                       const std::vector<double>& u, double crit, const HarmonicField& v) {
    std::vector<double> pot(grid.size());
    for (int i = 0; i < grid.size(); ++i)
        pot[i] = h_tot[i] - (crit - 1.0) * f[i] * std::pow(u[i], crit - 2.0) +
                 (crit + 1.0) * rho[i] * std::pow(u[i], -crit - 2.0);
    HarmonicField out(grid, v.axes());
    ModeOperator op0(grid, 0, pot);
    out.l0 = op0.apply(v.l0);
    if (v.axes() > 0) {
        ModeOperator op1(grid, 1, pot);
        for (int a = 0; a < v.axes(); ++a) out.l1[a] = op1.apply(v.l1[a]);
    }
    return out;
}

BackgroundProfile BackgroundProfile::solve(const ModelConfig& cfg, const GroundState& gs,
                                           double r_max, int N_interior) {
    BackgroundProfile bp;
    bp.cfg_ = cfg;
    bp.u0_ = gs.u0;
    const double resolve = std::min(0.25 * r_max, std::max(cfg.beta, 1e-4 * r_max));
    bp.grid_ = RadialGrid::make(cfg.n, r_max, resolve, N_interior);
    const auto& g = bp.grid_;
    const double p = cfg.crit();
    std::vector<double> htot(g.size()), fv(g.size());
    for (int i = 0; i < g.size(); ++i) {
        htot[i] = cfg.h0 + h_bump_radial(cfg, g.r[i]);
        fv[i] = f_radial(cfg, g.r[i]);
    }
    std::vector<double> u(g.size(), gs.u0);
    u[g.N + 1] = gs.u0;
    // Newton iteration on F(u) = (Delta + h) u - f u^{p-1} - rho0 u^{-p-1}
    for (int it = 0; it < 60; ++it) {
        std::vector<double> pot(g.size());
        for (int i = 0; i < g.size(); ++i)
            pot[i] = htot[i] - (p - 1.0) * fv[i] * std::pow(u[i], p - 2.0) +
                     (p + 1.0) * cfg.rho0 * std::pow(u[i], -p - 2.0);
        ModeOperator J(g, 0, pot);
        // residual: use operator with h and subtract nonlinearities (weak form)
        ModeOperator Ah(g, 0, htot);
        std::vector<double> resid = Ah.apply(u);
        // apply() ignores the Dirichlet boundary data; add its flux to node N
        {
            const double c = std::pow(g.r_edge[g.N], g.n - 1) / (g.r[g.N + 1] - g.r[g.N]);
            resid[g.N] += -c * u[g.N + 1] / g.w[g.N];
        }
        std::vector<double> rhs(g.size(), 0.0);
        for (int i = 0; i <= g.N; ++i) {
            resid[i] -= fv[i] * std::pow(u[i], p - 1.0) + cfg.rho0 * std::pow(u[i], -p - 1.0);
            rhs[i] = -resid[i];
        }
        // Dirichlet correction for the Jacobian solve: boundary increment 0
        std::vector<double> du = J.solve(rhs);
        double step = 1.0, dn = 0.0;
        for (int i = 0; i <= g.N; ++i) {
            if (u[i] + du[i] <= 0.2 * gs.eps0) step = std::min(step, 0.5);
            dn = std::max(dn, std::abs(du[i]));
        }
        for (int i = 0; i <= g.N; ++i) u[i] += step * du[i];
        if (step == 1.0 && dn < 1e-12 * std::max(1.0, gs.u0)) break;
        if (it == 59) throw NumericalError("background profile Newton did not converge");
    }
    bp.u_ = u;
    bp.build_spline();
    return bp;
}

void BackgroundProfile::build_spline() {
    const auto& g = grid_;
    const int m = g.size();
    spp_.assign(m, 0.0);
    // natural cubic spline on the full node set
    std::vector<double> a(m, 0.0), b(m, 0.0), c(m, 0.0), d(m, 0.0);
    for (int i = 1; i < m - 1; ++i) {
        const double h0 = g.r[i] - g.r[i - 1], h1 = g.r[i + 1] - g.r[i];
        a[i] = h0 / 6.0;
        b[i] = (h0 + h1) / 3.0;
        c[i] = h1 / 6.0;
        d[i] = (u_[i + 1] - u_[i]) / h1 - (u_[i] - u_[i - 1]) / h0;
    }
    // forward elimination (natural BC: spp_0 = spp_{m-1} = 0)
    for (int i = 2; i < m - 1; ++i) {
        const double f = a[i] / b[i - 1];
        b[i] -= f * c[i - 1];
        d[i] -= f * d[i - 1];
    }
    for (int i = m - 2; i >= 1; --i)
        spp_[i] = (d[i] - c[i] * (i + 1 < m - 1 ? spp_[i + 1] : 0.0)) / b[i];
}

double BackgroundProfile::value(double r) const {
    const auto& g = grid_;
    if (r >= g.r_max) return u_[g.N + 1];
    // locate the interval (nodes are exponentially mapped)
    int lo = 0, hi = g.size() - 1;
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (g.r[mid] <= r) lo = mid;
        else hi = mid;
    }
    const double h = g.r[hi] - g.r[lo];
    const double A = (g.r[hi] - r) / h, B = (r - g.r[lo]) / h;
    return A * u_[lo] + B * u_[hi] +
           ((A * A * A - A) * spp_[lo] + (B * B * B - B) * spp_[hi]) * h * h / 6.0;
}

double BackgroundProfile::deriv(double r) const {
    const auto& g = grid_;
    if (r >= g.r_max) return 0.0;
    int lo = 0, hi = g.size() - 1;
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (g.r[mid] <= r) lo = mid;
        else hi = mid;
    }
    const double h = g.r[hi] - g.r[lo];
    const double A = (g.r[hi] - r) / h, B = (r - g.r[lo]) / h;
    return (u_[hi] - u_[lo]) / h +
           ((1.0 - 3.0 * A * A) * spp_[lo] + (3.0 * B * B - 1.0) * spp_[hi]) * h / 6.0;
}

double BackgroundProfile::laplacian(double r) const {
    const double p = cfg_.crit();
    const double uu = value(r);
    const double h = cfg_.h0 + h_bump_radial(cfg_, r);
    return f_radial(cfg_, r) * std::pow(uu, p - 1.0) + cfg_.rho0 * std::pow(uu, -p - 1.0) -
           h * uu;
}

}  // namespace blowup
