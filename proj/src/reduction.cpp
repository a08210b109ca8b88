#include "blowup/reduction.hpp"

#include <algorithm>
#include <cmath>

namespace blowup {

namespace {

double vnorm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

Reducer::Reducer(const ModelConfig& cfg, const GroundState& gs, const BackgroundProfile& bg,
                 double t, const std::vector<double>& p, const ReductionOptions& opt)
    : cfg_(cfg), gs_(gs), bg_(&bg), opt_(opt), t_(t), p_(p) {
    if (!(t >= 1.0 / opt.D && t <= opt.D))
        throw ConfigError("t outside [1/D, D]");
    if (static_cast<int>(p.size()) != cfg.n) throw ConfigError("p must have dimension n");
    if (vnorm(p) > 1.0 + 1e-12) throw ConfigError("p must lie in the closed unit ball");
    build_geometry();
    build_fields();
    build_basis();
    build_operator();
    if (cfg_.alpha > 0.0) kelvin_ = std::make_unique<KelvinTable>(KelvinTable::build(grid_));
}

void Reducer::build_geometry() {
    const int n = cfg_.n;
    xi_.assign(n, 0.0);
    for (int i = 0; i < n; ++i) xi_[i] = cfg_.beta * p_[i];
    xi_norm_ = vnorm(xi_);

    // active axes spanned by p-hat and the coupling direction
    axes_.clear();
    const double pn = vnorm(p_);
    if (pn > 1e-14) {
        std::vector<double> a = p_;
        for (double& x : a) x /= pn;
        axes_.push_back(a);
    }
    if (cfg_.alpha > 0.0) {
        std::vector<double> z = cfg_.zdir;
        if (!axes_.empty()) {
            double dot = 0.0;
            for (int i = 0; i < n; ++i) dot += z[i] * axes_[0][i];
            for (int i = 0; i < n; ++i) z[i] -= dot * axes_[0][i];
            const double zn = vnorm(z);
            if (zn > 1e-10) {
                for (double& x : z) x /= zn;
                axes_.push_back(z);
            }
        } else {
            axes_.push_back(z);
        }
    }
    m_ = static_cast<int>(axes_.size());
    phat_act_ = {0.0, 0.0};
    zeta_act_ = {0.0, 0.0};
    for (int a = 0; a < m_; ++a) {
        double dp = 0.0, dz = 0.0;
        for (int i = 0; i < n; ++i) {
            if (pn > 1e-14) dp += axes_[a][i] * p_[i] / pn;
            dz += axes_[a][i] * cfg_.zdir[i];
        }
        phat_act_[a] = dp;
        if (cfg_.alpha > 0.0) zeta_act_[a] = dz;
    }

    bp_.t = t_;
    bp_.mu = cfg_.mu;
    bp_.center = xi_;
    bp_.f_center = f_radial(cfg_, xi_norm_);
    bp_.r_cut = cfg_.r_cut;
    bp_.n = n;
    bp_.validate();

    const double delta = bp_.delta();
    const double r_max =
        std::max(opt_.r_max_factor * std::sqrt(delta), 2.5 * cfg_.r_cut + xi_norm_);
    if (bg_->grid().r_max < r_max + xi_norm_ - 1e-12)
        throw ConfigError("background profile domain too small for this run");
    grid_ = RadialGrid::make(n, r_max, delta, opt_.N_grid);
    rule_ = AngularRule::make(n, m_, opt_.angular_points, opt_.azimuthal_points);

    // ||X||_inf and sup |grad X| over the bump support
    double zmax = 0.0, dzmax = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double s = i / 1000.0;
        zmax = std::max(zmax, std::abs(bump_zdir(s).v));
        dzmax = std::max(dzmax, std::abs(bump_zdir(s).d1));
    }
    eta_ = cfg_.alpha * std::pow(cfg_.mu, 0.5 * (cfg_.n - 1)) * zmax;
    gradX_sup_ = cfg_.alpha * std::pow(cfg_.mu, 0.5 * (cfg_.n - 1)) * dzmax / cfg_.r_cut;
}

void Reducer::build_fields() {
    const int m = grid_.size();
    const int K = rule_.size();
    const double p = cfg_.crit();
    W_.resize(m);
    Wlap_.resize(m);
    for (int i = 0; i < m; ++i) {
        W_[i] = bubble_W(bp_, grid_.r[i]);
        Wlap_[i] = bubble_W_lap(bp_, grid_.r[i]);
    }
    h_at_.assign(K, std::vector<double>(m, 0.0));
    f_at_.assign(K, std::vector<double>(m, 0.0));
    xamp_at_.assign(K, std::vector<double>(m, 0.0));
    ubg_at_.assign(K, std::vector<double>(m, 0.0));
    E0_at_.assign(K, std::vector<double>(m, 0.0));
    const double eps_tr = gs_.eps0 / 4.0;
    for (int k = 0; k < K; ++k) {
        double pdotw = 0.0;
        for (int a = 0; a < m_; ++a) pdotw += rule_.x[k][a] * phat_act_[a];
        for (int i = 0; i < m; ++i) {
            const double r = grid_.r[i];
            const double ax = std::sqrt(std::max(
                0.0, xi_norm_ * xi_norm_ + r * r + 2.0 * r * xi_norm_ * pdotw));
            h_at_[k][i] = cfg_.h0 + h_bump_radial(cfg_, ax);
            f_at_[k][i] = f_radial(cfg_, ax);
            xamp_at_[k][i] = x_amplitude_radial(cfg_, ax);
            ubg_at_[k][i] = bg_->value(ax);
            const double U = ubg_at_[k][i] + W_[i];
            E0_at_[k][i] = bg_->laplacian(ax) + Wlap_[i] + h_at_[k][i] * U -
                           f_at_[k][i] * std::pow(U, p - 1.0) -
                           cfg_.rho0 * std::pow(truncate_rho(eps_tr, U), -p - 1.0);
        }
    }
    // l=0 projections of h and of the linearization coefficient
    h0rad_.assign(m, 0.0);
    P0_.assign(m, 0.0);
    const double total = sphere_volume(cfg_.n - 1);
    for (int i = 0; i < m; ++i) {
        double sh = 0.0, sp = 0.0;
        for (int k = 0; k < K; ++k) {
            const double U = ubg_at_[k][i] + W_[i];
            const double rU = truncate_rho(eps_tr, U);
            const double gp = (p - 1.0) * f_at_[k][i] * std::pow(U, p - 2.0) -
                              (p + 1.0) * cfg_.rho0 * truncate_rho_d1(eps_tr, U) *
                                  std::pow(rU, -p - 2.0);
            sh += rule_.w[k] * h_at_[k][i];
            sp += rule_.w[k] * gp;
        }
        h0rad_[i] = sh / total;
        P0_[i] = sp / total;
    }
}

void Reducer::build_basis() {
    const int m = grid_.size();
    Z_.clear();
    Z_.push_back(HarmonicField(grid_, m_));
    for (int i = 0; i < m; ++i) Z_.back().l0[i] = kernel_Z0(bp_, grid_.r[i]);
    for (int a = 0; a < m_; ++a) {
        HarmonicField Za(grid_, m_);
        for (int i = 0; i < m; ++i) Za.l1[a][i] = kernel_Z1(bp_, grid_.r[i]);
        Z_.push_back(std::move(Za));
    }
}

void Reducer::build_operator() {
    const int m = grid_.size();
    S0_ = std::make_unique<ModeOperator>(grid_, 0, h0rad_);
    if (m_ > 0) S1_ = std::make_unique<ModeOperator>(grid_, 1, h0rad_);

    const int nb = basis_size();
    const int n0 = grid_.N + 1;         // l0 unknowns (nodes 0..N)
    const int n1 = grid_.N;             // per-axis l1 unknowns (nodes 1..N)
    n_unknowns_ = n0 + m_ * n1 + nb;
    const double omega = sphere_volume(cfg_.n - 1);

    // pairing representers zeta_j = dual of <., Z_j>_h
    zeta_pair_.clear();
    const int K = rule_.size();
    for (int j = 0; j < nb; ++j) {
        HarmonicField zp(grid_, m_);
        // stiffness + h0rad mass part through the mode matrices
        {
            Eigen::VectorXd z0(n0);
            for (int i = 0; i < n0; ++i) z0(i) = Z_[j].l0[i];
            Eigen::VectorXd y = S0_->matrix() * z0;
            for (int i = 0; i < n0; ++i) zp.l0[i] = omega * y(i);
        }
        for (int a = 0; a < m_; ++a) {
            Eigen::VectorXd z1(n1);
            for (int i = 0; i < n1; ++i) z1(i) = Z_[j].l1[a][i + 1];
            Eigen::VectorXd y = S1_->matrix() * z1;
            for (int i = 0; i < n1; ++i) zp.l1[a][i + 1] = omega / cfg_.n * y(i);
        }
        // h1 mass part via angular quadrature
        for (int i = 0; i < m; ++i) {
            double d0 = 0.0;
            std::array<double, 2> d1{0.0, 0.0};
            for (int k = 0; k < K; ++k) {
                const double h1 = h_at_[k][i] - h0rad_[i];
                const double zv = Z_[j].eval(i, rule_.x[k]);
                const double wk = rule_.w[k] * h1 * zv;
                d0 += wk;
                for (int a = 0; a < m_; ++a) d1[a] += wk * rule_.x[k][a];
            }
            zp.l0[i] += grid_.wq[i] * d0;
            for (int a = 0; a < m_; ++a) zp.l1[a][i] += grid_.wq[i] * d1[a];
        }
        zeta_pair_.push_back(std::move(zp));
    }

    // Gram matrix and its inverse
    Q_.assign(nb, std::vector<double>(nb, 0.0));
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) Q_[i][j] = pair_h(Z_[i], j);
    Eigen::MatrixXd Q(nb, nb);
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) Q(i, j) = Q_[i][j];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Q, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double cond = svd.singularValues()(0) / svd.singularValues()(nb - 1);
    if (!(cond < opt_.gram_cond_max))
        throw RegimeError("kernel Gram condition number too large (delta not asymptotic)");
    Eigen::MatrixXd Qi = Q.inverse();
    Qinv_.assign(nb, std::vector<double>(nb, 0.0));
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) Qinv_[i][j] = Qi(i, j);

    // bordered matrix
    std::vector<Eigen::Triplet<double>> trip;
    auto add_block = [&](const Eigen::SparseMatrix<double>& S, int off, double scale) {
        for (int c = 0; c < S.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(S, c); it; ++it)
                trip.emplace_back(off + it.row(), off + it.col(), scale * it.value());
    };
    add_block(S0_->matrix(), 0, omega);
    for (int a = 0; a < m_; ++a) add_block(S1_->matrix(), n0 + a * n1, omega / cfg_.n);
    // subtract the frozen linearization (l=0 potential P0)
    for (int i = 0; i < n0; ++i) trip.emplace_back(i, i, -omega * grid_.w[i] * P0_[i]);
    for (int a = 0; a < m_; ++a)
        for (int i = 0; i < n1; ++i) {
            const int r = n0 + a * n1 + i;
            trip.emplace_back(r, r, -omega / cfg_.n * grid_.w[i + 1] * P0_[i + 1]);
        }
    // borders
    for (int j = 0; j < nb; ++j) {
        const int cj = n0 + m_ * n1 + j;
        for (int i = 0; i < n0; ++i) {
            const double v = zeta_pair_[j].l0[i];
            if (v != 0.0) {
                trip.emplace_back(i, cj, -v);
                trip.emplace_back(cj, i, v);
            }
        }
        for (int a = 0; a < m_; ++a)
            for (int i = 0; i < n1; ++i) {
                const double v = zeta_pair_[j].l1[a][i + 1];
                if (v != 0.0) {
                    const int r = n0 + a * n1 + i;
                    trip.emplace_back(r, cj, -v);
                    trip.emplace_back(cj, r, v);
                }
            }
    }
    bordered_.resize(n_unknowns_, n_unknowns_);
    bordered_.setFromTriplets(trip.begin(), trip.end());
    // symmetric equilibration: the cell volumes span many orders of
    // magnitude on the graded grid
    equil_ = Eigen::VectorXd::Ones(n_unknowns_);
    Eigen::VectorXd colmax = Eigen::VectorXd::Zero(n_unknowns_);
    for (int c = 0; c < bordered_.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(bordered_, c); it; ++it)
            colmax(it.col()) = std::max(colmax(it.col()), std::abs(it.value()));
    for (int i = 0; i < n_unknowns_; ++i)
        equil_(i) = colmax(i) > 0.0 ? 1.0 / std::sqrt(colmax(i)) : 1.0;
    Eigen::SparseMatrix<double> scaled = bordered_;
    for (int c = 0; c < scaled.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(scaled, c); it; ++it)
            it.valueRef() *= equil_(it.row()) * equil_(it.col());
    lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(scaled);
    if (lu_->info() != Eigen::Success)
        throw RegimeError("saddle system singular (linearized inversion failed)");
}

Eigen::VectorXd Reducer::solve_bordered(const Eigen::VectorXd& b) const {
    Eigen::VectorXd bs = b.cwiseProduct(equil_);
    Eigen::VectorXd xs = lu_->solve(bs);
    if (lu_->info() != Eigen::Success) throw NumericalError("bordered solve failed");
    // one step of iterative refinement in the original scaling
    Eigen::VectorXd x = xs.cwiseProduct(equil_);
    Eigen::VectorXd r = b - bordered_ * x;
    Eigen::VectorXd dx = lu_->solve(r.cwiseProduct(equil_));
    x += dx.cwiseProduct(equil_);
    return x;
}

double Reducer::pair_h(const HarmonicField& f, int j) const {
    double s = 0.0;
    const auto& zp = zeta_pair_[j];
    for (int i = 0; i < grid_.size(); ++i) s += f.l0[i] * zp.l0[i];
    for (int a = 0; a < m_; ++a)
        for (int i = 0; i < grid_.size(); ++i) s += f.l1[a][i] * zp.l1[a][i];
    return s;
}

double Reducer::inner_h(const HarmonicField& u, const HarmonicField& v) const {
    // the same discrete product the kernel constraints use: mode forms
    // (stiffness + l=0 projected h) plus the angular remainder of h
    const double omega = sphere_volume(cfg_.n - 1);
    double s = omega * S0_->form(u.l0, v.l0);
    for (int a = 0; a < m_; ++a) s += omega / cfg_.n * S1_->form(u.l1[a], v.l1[a]);
    const int K = rule_.size();
    for (int i = 0; i < grid_.size(); ++i) {
        double acc = 0.0;
        for (int k = 0; k < K; ++k)
            acc += rule_.w[k] * (h_at_[k][i] - h0rad_[i]) * u.eval(i, rule_.x[k]) *
                   v.eval(i, rule_.x[k]);
        s += grid_.wq[i] * acc;
    }
    return s;
}

double Reducer::h1_norm(const HarmonicField& u) const {
    return std::sqrt(std::max(0.0, inner_h(u, u)));
}

double Reducer::f_norm(const HarmonicField& u) const {
    double s = 0.0;
    for (int i = 0; i <= grid_.N; ++i)
        for (int k = 0; k < rule_.size(); ++k)
            s = std::max(s, std::abs(u.eval(i, rule_.x[k])) / ubgW(i, k));
    return s;
}

HarmonicField Reducer::project_offkernel(const HarmonicField& f) const {
    const int nb = basis_size();
    std::vector<double> b(nb, 0.0), kcf(nb, 0.0);
    for (int j = 0; j < nb; ++j) b[j] = pair_h(f, j);
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) kcf[i] += Qinv_[i][j] * b[j];
    HarmonicField out = f;
    for (int j = 0; j < nb; ++j) out.axpy(-kcf[j], Z_[j]);
    return out;
}

Eigen::VectorXd Reducer::stack(const HarmonicField& f) const {
    const int n0 = grid_.N + 1, n1 = grid_.N;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_unknowns_);
    for (int i = 0; i < n0; ++i) x(i) = f.l0[i];
    for (int a = 0; a < m_; ++a)
        for (int i = 0; i < n1; ++i) x(n0 + a * n1 + i) = f.l1[a][i + 1];
    return x;
}

HarmonicField Reducer::unstack(const Eigen::VectorXd& x, std::vector<double>* mult) const {
    const int n0 = grid_.N + 1, n1 = grid_.N;
    HarmonicField f(grid_, m_);
    for (int i = 0; i < n0; ++i) f.l0[i] = x(i);
    for (int a = 0; a < m_; ++a)
        for (int i = 0; i < n1; ++i) f.l1[a][i + 1] = x(n0 + a * n1 + i);
    if (mult) {
        mult->assign(basis_size(), 0.0);
        for (int j = 0; j < basis_size(); ++j) (*mult)[j] = x(n0 + m_ * n1 + j);
    }
    return f;
}

HarmonicField Reducer::apply_Lk(const HarmonicField& psi) const {
    // Pi [psi - B(P0 psi)]
    HarmonicField Bp(grid_, m_);
    {
        std::vector<double> g(grid_.size());
        for (int i = 0; i < grid_.size(); ++i) g[i] = P0_[i] * psi.l0[i];
        Bp.l0 = S0_->solve(g);
        for (int a = 0; a < m_; ++a) {
            for (int i = 0; i < grid_.size(); ++i) g[i] = P0_[i] * psi.l1[a][i];
            Bp.l1[a] = S1_->solve(g);
        }
    }
    HarmonicField out = psi;
    out.axpy(-1.0, Bp);
    return project_offkernel(out);
}

HarmonicField Reducer::invert_linearized(const HarmonicField& rhs, double* ratio) const {
    // (A - M P0) psi - sum c_j zeta_j = A rhs (weak), zeta_j . psi = 0
    const double omega = sphere_volume(cfg_.n - 1);
    const int n0 = grid_.N + 1, n1 = grid_.N;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_unknowns_);
    {
        Eigen::VectorXd r0(n0);
        for (int i = 0; i < n0; ++i) r0(i) = rhs.l0[i];
        Eigen::VectorXd y = S0_->matrix() * r0;
        for (int i = 0; i < n0; ++i) b(i) = omega * y(i);
        for (int a = 0; a < m_; ++a) {
            Eigen::VectorXd r1(n1);
            for (int i = 0; i < n1; ++i) r1(i) = rhs.l1[a][i + 1];
            Eigen::VectorXd z = S1_->matrix() * r1;
            for (int i = 0; i < n1; ++i) b(n0 + a * n1 + i) = omega / cfg_.n * z(i);
        }
    }
    Eigen::VectorXd x = solve_bordered(b);
    HarmonicField psi = unstack(x, nullptr);
    const double num = h1_norm(psi), den = h1_norm(rhs);
    if (ratio) *ratio = den > 0.0 ? num / den : 0.0;
    if (den > 0.0 && num / den > opt_.C_max_inversion)
        throw RegimeError("linearized inversion bound exceeded (asymptotic regime violated)");
    return psi;
}

void Reducer::update_coupling(const HarmonicField& v) {
    if (cfg_.alpha <= 0.0) {
        LTdiff_.reset();
        return;
    }
    const int m = grid_.size();
    const int K = rule_.size();
    const double p = cfg_.crit();
    const double total = sphere_volume(cfg_.n - 1);
    std::vector<double> q0(m, 0.0);
    double dropped = 0.0, kept = 0.0;
    for (int i = 0; i < m; ++i) {
        double s0 = 0.0;
        for (int k = 0; k < K; ++k) {
            const double U = ubg_at_[k][i] + W_[i] + v.eval(i, rule_.x[k]);
            const double q = (std::pow(U, p) - std::pow(ubg_at_[k][i], p)) * xamp_at_[k][i];
            s0 += rule_.w[k] * q;
        }
        q0[i] = s0 / total;
        kept += std::abs(q0[i]) * grid_.wq[i];
    }
    // magnitude of the dropped non-radial source content (a posteriori)
    for (int i = 0; i < m; ++i) {
        double mx = 0.0;
        for (int k = 0; k < K; ++k) {
            const double U = ubg_at_[k][i] + W_[i] + v.eval(i, rule_.x[k]);
            const double q = (std::pow(U, p) - std::pow(ubg_at_[k][i], p)) * xamp_at_[k][i];
            mx = std::max(mx, std::abs(q - q0[i]));
        }
        dropped += mx * grid_.wq[i];
    }
    last_dropped_ = kept > 0.0 ? dropped / kept : 0.0;
    LTdiff_ = kelvin_->convolve(q0, zeta_act_);
}

double Reducer::source_term(int i, int k, const HarmonicField& v) const {
    if (!LTdiff_) return 0.0;
    const double p = cfg_.crit();
    const double U = ubg_at_[k][i] + W_[i] + v.eval(i, rule_.x[k]);
    return LTdiff_->frob2(i, rule_.x[k]) / std::pow(U, p + 1.0);
}

Reducer::InnerResult Reducer::picard_inner(const HarmonicField& v, double eps_for_tol) const {
    const int K = rule_.size();
    const double p = cfg_.crit();
    const double eps_tr = gs_.eps0 / 4.0;
    const double tol = opt_.inner_tol_factor * eps_for_tol;
    HarmonicField phi(grid_, m_);
    std::vector<double> mult(basis_size(), 0.0);
    double dprev = -1.0, contraction = 0.0;
    int nonc = 0;
    InnerResult res;
    for (int it = 0; it < opt_.max_inner; ++it) {
        // rhs field: N(phi) + S_T - E0, assembled in dual (weak) form
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n_unknowns_);
        const int n0 = grid_.N + 1, n1 = grid_.N;
        for (int i = 0; i <= grid_.N; ++i) {
            double d0 = 0.0;
            std::array<double, 2> d1{0.0, 0.0};
            for (int k = 0; k < K; ++k) {
                const double U = ubg_at_[k][i] + W_[i];
                const double ph = phi.eval(i, rule_.x[k]);
                const double h1 = h_at_[k][i] - h0rad_[i];
                const double G1 = f_at_[k][i] * std::pow(U + ph, p - 1.0) +
                                  cfg_.rho0 * std::pow(truncate_rho(eps_tr, U + ph), -p - 1.0);
                const double G0 = f_at_[k][i] * std::pow(U, p - 1.0) +
                                  cfg_.rho0 * std::pow(truncate_rho(eps_tr, U), -p - 1.0);
                const double N = G1 - G0 - P0_[i] * ph - h1 * ph;
                const double R = N + source_term(i, k, v) - E0_at_[k][i];
                const double wk = rule_.w[k] * R;
                d0 += wk;
                for (int a = 0; a < m_; ++a) d1[a] += wk * rule_.x[k][a];
            }
            b(i) = grid_.wq[i] * d0;
            for (int a = 0; a < m_; ++a)
                if (i >= 1) b(n0 + a * n1 + (i - 1)) = grid_.wq[i] * d1[a];
        }
        Eigen::VectorXd x = solve_bordered(b);
        HarmonicField phin = unstack(x, &mult);
        HarmonicField diff = phin;
        diff.axpy(-1.0, phi);
        const double d = h1_norm(diff);
        phi = std::move(phin);
        res.iterations = it + 1;
        if (dprev > 0.0 && d > 10.0 * tol) {
            const double f = d / dprev;
            contraction = std::max(contraction, f);
            if (f >= 1.0 && ++nonc >= 3)
                throw RegimeError(
                    "inner Picard contraction lost (outside the fixed-point regime)");
        }
        if (d < tol) break;
        dprev = d;
        if (it + 1 == opt_.max_inner)
            throw NumericalError("inner Picard did not reach tolerance");
    }
    // truncation must be inactive at the fixed point
    for (int i = 0; i <= grid_.N; ++i)
        for (int k = 0; k < K; ++k) {
            const double uk = ubg_at_[k][i] + W_[i] + phi.eval(i, rule_.x[k]);
            if (uk < eps_tr)
                throw RegimeError("rho-truncation active at the inner fixed point");
        }
    res.phi = std::move(phi);
    res.multipliers = mult;
    res.contraction = contraction;
    return res;
}

ReductionState Reducer::pingpong_outer() {
    ReductionState st;
    st.t = t_;
    st.p = p_;
    const double delta = bp_.delta();

    HarmonicField v(grid_, m_);
    update_coupling(v);
    InnerResult pilot = picard_inner(v, delta);
    double C0 = opt_.C0_override > 0.0 ? opt_.C0_override : 2.0 * f_norm(pilot.phi) / delta;
    if (C0 <= 0.0) C0 = 1.0;
    const double eps_k = 4.0 * C0 * delta;
    st.eps_k = eps_k;
    st.diag.C0 = C0;
    st.diag.eps_k = eps_k;
    st.diag.eta = eta_;
    if (C0 * eta_ > 0.25)
        throw RegimeError("F_k escape: eta too large for the chosen C0 (reduce alpha)");

    st.diag.inner_contraction.push_back(pilot.contraction);
    v = pilot.phi;
    std::vector<double> mult = pilot.multipliers;
    HarmonicField phi = pilot.phi;
    double dprev = -1.0;
    for (int it = 0; it < opt_.max_outer; ++it) {
        update_coupling(v);
        st.diag.source_l1_dropped = std::max(st.diag.source_l1_dropped, last_dropped_);
        InnerResult r = picard_inner(v, eps_k);
        st.diag.inner_contraction.push_back(r.contraction);
        HarmonicField diff = r.phi;
        diff.axpy(-1.0, v);
        const double d = f_norm(diff);
        st.diag.outer_increments.push_back(d);
        const double fr = f_norm(r.phi);
        if (fr > eps_k * (1.0 + 1e-9))
            throw RegimeError("F_k escape: iterate left the admissible set (eta/alpha too large)");
        if (dprev > 0.0 && d > 0.0)
            st.diag.outer_contraction = std::max(st.diag.outer_contraction, d / dprev);
        phi = r.phi;
        mult = r.multipliers;
        v = r.phi;
        st.diag.outer_iterations = it + 1;
        if (d < opt_.outer_tol) break;
        dprev = d;
        if (it + 1 == opt_.max_outer)
            throw NumericalError("outer ping-pong did not reach tolerance");
    }
    st.v = v;
    st.phi = phi;
    st.lambdas_active = mult;
    st.diag.sup_ratio = f_norm(phi);

    // gram diagnostics
    double offd = 0.0, dmax = 0.0;
    for (int i = 0; i < basis_size(); ++i) {
        dmax = std::max(dmax, std::abs(Q_[i][i]));
        for (int j = 0; j < basis_size(); ++j)
            if (i != j) offd = std::max(offd, std::abs(Q_[i][j]));
    }
    st.diag.gram_offdiag = dmax > 0.0 ? offd / dmax : 0.0;

    // orthogonality residual
    double orth = 0.0;
    const double nph = h1_norm(phi);
    for (int j = 0; j < basis_size(); ++j) {
        const double nz = std::sqrt(Q_[j][j]);
        orth = std::max(orth, std::abs(pair_h(phi, j)) / std::max(1e-300, nph * nz));
    }
    st.diag.orth_residual = orth;

    // lambda extraction and consistency with the saddle multipliers
    st.lambdas = extract_lambdas(st);
    double lc = 0.0, lmax = 0.0;
    std::vector<double> lact = lambdas_to_active(st.lambdas);
    for (int j = 0; j < basis_size(); ++j) {
        lmax = std::max(lmax, std::abs(mult[j]));
        lc = std::max(lc, std::abs(lact[j] - mult[j]));
    }
    st.diag.lambda_consistency = lmax > 0.0 ? lc / lmax : 0.0;

    double minuk = 1e300;
    for (int i = 0; i <= grid_.N; ++i)
        for (int k = 0; k < rule_.size(); ++k)
            minuk = std::min(minuk, ubg_at_[k][i] + W_[i] + phi.eval(i, rule_.x[k]));
    st.diag.min_uk = minuk;
    st.diag.truncation_active = minuk < gs_.eps0 / 4.0;
    return st;
}

std::vector<double> Reducer::extract_lambdas(const ReductionState& st) const {
    // residual pairing b_j = <(A - M P0) phi - M (N + S_T - E0), Z_j>
    const int K = rule_.size();
    const double p = cfg_.crit();
    const double eps_tr = gs_.eps0 / 4.0;
    const double omega = sphere_volume(cfg_.n - 1);
    const int n0 = grid_.N + 1, n1 = grid_.N;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n_unknowns_);
    {
        Eigen::VectorXd f0(n0);
        for (int i = 0; i < n0; ++i) f0(i) = st.phi.l0[i];
        Eigen::VectorXd y = S0_->matrix() * f0;
        for (int i = 0; i < n0; ++i)
            r(i) = omega * (y(i) - grid_.w[i] * P0_[i] * st.phi.l0[i]);
        for (int a = 0; a < m_; ++a) {
            Eigen::VectorXd f1(n1);
            for (int i = 0; i < n1; ++i) f1(i) = st.phi.l1[a][i + 1];
            Eigen::VectorXd z = S1_->matrix() * f1;
            for (int i = 0; i < n1; ++i)
                r(n0 + a * n1 + i) =
                    omega / cfg_.n * (z(i) - grid_.w[i + 1] * P0_[i + 1] * st.phi.l1[a][i + 1]);
        }
    }
    for (int i = 0; i <= grid_.N; ++i) {
        double d0 = 0.0;
        std::array<double, 2> d1{0.0, 0.0};
        for (int k = 0; k < K; ++k) {
            const double U = ubg_at_[k][i] + W_[i];
            const double ph = st.phi.eval(i, rule_.x[k]);
            const double h1 = h_at_[k][i] - h0rad_[i];
            const double G1 = f_at_[k][i] * std::pow(U + ph, p - 1.0) +
                              cfg_.rho0 * std::pow(truncate_rho(eps_tr, U + ph), -p - 1.0);
            const double G0 = f_at_[k][i] * std::pow(U, p - 1.0) +
                              cfg_.rho0 * std::pow(truncate_rho(eps_tr, U), -p - 1.0);
            const double N = G1 - G0 - P0_[i] * ph - h1 * ph;
            const double R = N + source_term(i, k, st.v) - E0_at_[k][i];
            const double wk = rule_.w[k] * R;
            d0 += wk;
            for (int a = 0; a < m_; ++a) d1[a] += wk * rule_.x[k][a];
        }
        r(i) -= grid_.wq[i] * d0;
        for (int a = 0; a < m_; ++a)
            if (i >= 1) r(n0 + a * n1 + (i - 1)) -= grid_.wq[i] * d1[a];
    }
    const int nb = basis_size();
    std::vector<double> b(nb, 0.0);
    for (int j = 0; j < nb; ++j) {
        // r is a dual vector, so pair it against the primal basis element
        Eigen::VectorXd zj = stack(Z_[j]);
        b[j] = zj.dot(r);
    }
    std::vector<double> lact(nb, 0.0);
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) lact[i] += Qinv_[i][j] * b[j];
    // map active-frame multipliers to coordinate lambdas
    std::vector<double> lam(cfg_.n + 1, 0.0);
    lam[0] = lact[0];
    for (int a = 0; a < m_; ++a)
        for (int i = 0; i < cfg_.n; ++i) lam[i + 1] += axes_[a][i] * lact[1 + a];
    return lam;
}

std::vector<double> Reducer::lambdas_to_active(const std::vector<double>& lam) const {
    std::vector<double> lact(basis_size(), 0.0);
    lact[0] = lam[0];
    for (int a = 0; a < m_; ++a)
        for (int i = 0; i < cfg_.n; ++i) lact[1 + a] += axes_[a][i] * lam[i + 1];
    return lact;
}

MonitorReport Reducer::pointwise_monitors(const ReductionState& st) const {
    MonitorReport rep;
    const double delta = bp_.delta();
    const int K = rule_.size();
    rep.sup_ratio = f_norm(st.phi);
    rep.R = 4.0;
    const double rfar = rep.R * std::sqrt(delta);
    rep.far_field_bound = delta / (rep.R * rep.R) + rep.R * rep.R * delta * delta +
                          std::pow(delta, 0.5 * (cfg_.n - 2)) * std::pow(cfg_.r_cut, -cfg_.n);
    double gsup = 0.0;
    for (int i = 1; i <= grid_.N; ++i) {
        for (int k = 0; k < K; ++k) {
            const double val = std::abs(st.phi.eval(i, rule_.x[k]));
            if (grid_.r[i] >= rfar) rep.far_field_sup = std::max(rep.far_field_sup, val);
        }
        // gradient monitor from radial differences
        const double dr = grid_.r[i + 1] - grid_.r[i - 1];
        double g2max = 0.0;
        for (int k = 0; k < K; ++k) {
            double drad = (st.phi.eval(i + 1, rule_.x[k]) - st.phi.eval(i - 1, rule_.x[k])) / dr;
            double ang2 = 0.0;
            for (int a = 0; a < m_; ++a) {
                const double c = st.phi.l1[a][i] / grid_.r[i];
                ang2 += c * c;
            }
            g2max = std::max(g2max, drad * drad + ang2);
        }
        const double th = delta + grid_.r[i];
        const double envelope = 1.0 + std::pow(delta, 0.5 * (cfg_.n - 2)) *
                                          std::pow(th, 1.0 - cfg_.n);
        gsup = std::max(gsup, std::sqrt(g2max) / envelope);
    }
    rep.grad_ratio = gsup;
    rep.far_field_constant =
        rep.far_field_bound > 0.0 ? rep.far_field_sup / rep.far_field_bound : 0.0;
    rep.min_uk = st.diag.min_uk;
    rep.eps0 = gs_.eps0;
    rep.truncation_active = st.diag.truncation_active;
    return rep;
}

double Reducer::u_at_center() const { return bg_->value(xi_norm_); }

std::vector<double> Reducer::grad_u_at_center() const {
    std::vector<double> g(cfg_.n, 0.0);
    if (xi_norm_ > 0.0) {
        const double du = bg_->deriv(xi_norm_);
        for (int i = 0; i < cfg_.n; ++i) g[i] = du * xi_[i] / xi_norm_;
    }
    return g;
}

}  // namespace blowup
