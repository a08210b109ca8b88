#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <optional>
#include <vector>

#include "blowup/elliptic.hpp"
#include "blowup/grid.hpp"
#include "blowup/model.hpp"
#include "blowup/profiles.hpp"
#include "blowup/vector_green.hpp"

namespace blowup {

struct ReductionOptions {
    int N_grid = 420;
    double r_max_factor = 64.0;  // r_max = factor sqrt(delta)
    int angular_points = 16;
    int azimuthal_points = 16;
    double D = 10.0;
    double inner_tol_factor = 1e-10;  // H1 increment < factor * eps_k
    double outer_tol = 1e-8;          // F-norm increment
    int max_inner = 400;
    int max_outer = 80;
    double C_max_inversion = 1e5;
    double C0_override = 0.0;
    double gram_cond_max = 1e6;
};

struct ReductionDiagnostics {
    double C0 = 0.0;
    double eps_k = 0.0;
    double eta = 0.0;  // ||X||_inf
    std::vector<double> inner_contraction;  // one value per outer iteration
    std::vector<double> outer_increments;
    double outer_contraction = 0.0;
    int outer_iterations = 0;
    double inversion_ratio_max = 0.0;
    double orth_residual = 0.0;
    double gram_offdiag = 0.0;
    double gram_cond = 0.0;
    double source_l1_dropped = 0.0;  // relative magnitude of dropped l>=1 source
    bool truncation_active = false;
    double min_uk = 0.0;
    double sup_ratio = 0.0;  // ||phi/(u+W)||_inf at convergence
    double lambda_consistency = 0.0;  // |extract - multipliers| relative
};

struct MonitorReport {
    double sup_ratio = 0.0;     // sup |phi| / (u+W)
    double far_field_sup = 0.0; // sup |phi| over |x-xi| >= R sqrt(delta)
    double far_field_bound = 0.0;  // delta/R^2 + R^2 delta^2 + delta^{(n-2)/2} r^-n
    double far_field_constant = 0.0;
    double grad_ratio = 0.0;    // sup |grad phi| / (1 + delta^{(n-2)/2} theta^{1-n})
    double min_uk = 0.0;
    double eps0 = 0.0;
    bool truncation_active = false;
    double R = 4.0;
};

struct ReductionState {
    double t = 1.0;
    std::vector<double> p;
    HarmonicField v, phi;
    std::vector<double> lambdas;         // size n+1, coordinate frame
    std::vector<double> lambdas_active;  // multipliers in the active frame
    double eps_k = 0.0;
    ReductionDiagnostics diag;
};

// Workspace for one (t, p) reduction run: grid about xi = beta p, kernel
// basis, frozen linearized operator, coupling tables.
class Reducer {
  public:
    Reducer(const ModelConfig& cfg, const GroundState& gs, const BackgroundProfile& bg, double t,
            const std::vector<double>& p, const ReductionOptions& opt = {});

    // kernel basis {Z_j} with the full-h Gram matrix
    int basis_size() const { return 1 + m_; }
    const HarmonicField& basis(int j) const { return Z_[j]; }
    const std::vector<std::vector<double>>& gram() const { return Q_; }

    double inner_h(const HarmonicField& u, const HarmonicField& v) const;
    double h1_norm(const HarmonicField& u) const;
    double f_norm(const HarmonicField& u) const;  // sup |u| / (u_bg + W)

    HarmonicField project_offkernel(const HarmonicField& f) const;

    // L_k psi for tests (Pi [psi - B(P0 psi)])
    HarmonicField apply_Lk(const HarmonicField& psi) const;
    // saddle solve of L_k psi = Pi rhs; reports ratio ||psi||_H1 / ||rhs||_H1
    HarmonicField invert_linearized(const HarmonicField& rhs, double* ratio = nullptr) const;

    // inner Picard fixed point at frozen outer iterate v
    struct InnerResult {
        HarmonicField phi;
        std::vector<double> multipliers;
        double contraction = 0.0;
        int iterations = 0;
    };
    InnerResult picard_inner(const HarmonicField& v, double eps_k_for_tol) const;

    // outer ping-pong fixed point
    ReductionState pingpong_outer();

    std::vector<double> extract_lambdas(const ReductionState& st) const;
    MonitorReport pointwise_monitors(const ReductionState& st) const;

    // pieces exposed for the expansion integrals and tests
    const RadialGrid& grid() const { return grid_; }
    const AngularRule& rule() const { return rule_; }
    const BubbleParams& bubble_params() const { return bp_; }
    const ModelConfig& config() const { return cfg_; }
    const GroundState& ground() const { return gs_; }
    int active_axes() const { return m_; }
    const std::vector<std::vector<double>>& axes() const { return axes_; }
    double u_at_center() const;            // u_bg(xi)
    std::vector<double> grad_u_at_center() const;
    double ubgW(int i, int k) const { return ubg_at_[k][i] + W_[i]; }
    double coeff_h(int i, int k) const { return h_at_[k][i]; }
    double coeff_f(int i, int k) const { return f_at_[k][i]; }
    const std::vector<double>& W() const { return W_; }
    const std::vector<double>& W_lap() const { return Wlap_; }
    double E0(int i, int k) const { return E0_at_[k][i]; }
    const std::optional<LgTField>& coupling_field() const { return LTdiff_; }
    const std::array<double, 2>& zeta_active() const { return zeta_act_; }
    double source_term(int i, int k, const HarmonicField& v) const;
    // update the coupling response for iterate v (no-op when alpha = 0)
    void update_coupling(const HarmonicField& v);

    double eval(const HarmonicField& f, int i, int k) const { return f.eval(i, rule_.x[k]); }
    double eta() const { return eta_; }
    double delta() const { return bp_.delta(); }

  private:
    ModelConfig cfg_;
    GroundState gs_;
    const BackgroundProfile* bg_;
    ReductionOptions opt_;
    double t_;
    std::vector<double> p_;
    std::vector<double> xi_;
    double xi_norm_ = 0.0;
    int m_ = 0;                            // active axes count
    std::vector<std::vector<double>> axes_;  // active axes (unit n-vectors)
    std::array<double, 2> phat_act_{};       // p-hat in active coords
    std::array<double, 2> zeta_act_{};       // coupling direction in active coords
    BubbleParams bp_;
    RadialGrid grid_;
    AngularRule rule_;
    double eta_ = 0.0;
    double gradX_sup_ = 0.0;

    // nodal data [angular node][radial node]
    std::vector<std::vector<double>> h_at_, f_at_, xamp_at_, ubg_at_, E0_at_;
    std::vector<double> W_, Wlap_;
    std::vector<double> h0rad_, P0_;
    std::vector<HarmonicField> Z_;
    std::vector<HarmonicField> zeta_pair_;  // pairing representers (weighted)
    std::vector<std::vector<double>> Q_;
    std::vector<std::vector<double>> Qinv_;

    std::unique_ptr<ModeOperator> S0_, S1_;
    Eigen::SparseMatrix<double> bordered_;
    Eigen::VectorXd equil_;  // diagonal equilibration of the bordered system
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
    int n_unknowns_ = 0;
    Eigen::VectorXd solve_bordered(const Eigen::VectorXd& b) const;

    std::unique_ptr<KelvinTable> kelvin_;
    std::optional<LgTField> LTdiff_;

    double last_dropped_ = 0.0;

    void build_geometry();
    void build_fields();
    void build_basis();
    void build_operator();
    double pair_h(const HarmonicField& f, int j) const;
    std::vector<double> lambdas_to_active(const std::vector<double>& lam) const;
    Eigen::VectorXd stack(const HarmonicField& f) const;
    HarmonicField unstack(const Eigen::VectorXd& x, std::vector<double>* mult) const;
    friend class ExpansionEvaluator;
};

}  // namespace blowup
