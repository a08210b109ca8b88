#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blowup/quadrature.hpp"
#include "blowup/reduction.hpp"

namespace blowup {

// Data for the closed-form leading terms of the kernel-coefficient
// expansion. u_center / grad_u come from the background profile; h0 is
// the flat-model background potential entering the t^2 balance.
struct LeadingParams {
    int n = 7;
    double t = 1.0;
    double mu = 0.0, tau = 0.0, beta = 0.0;
    double f_center = 1.0;
    double u_center = 0.0;
    double h0 = 0.0;
    double two_fu_offset = 0.0;  // n=6: h0 - 2 f u(xi0), absorbed in the t^2 row
    double H_p = 1.0;
    std::vector<double> gradH_p;  // size n
    std::vector<double> grad_u;   // size n
    double weyl_sq = 0.0;
    bool lcf = true;
    double rho_center = 0.0;  // for the n=6 coupling row
    double alpha = 0.0;

    double delta() const { return mu * t; }
};

LeadingParams make_leading_params(const ModelConfig& cfg, const GroundState& gs,
                                  const BackgroundProfile& bg, double t,
                                  const std::vector<double>& p);

// closed-form leading value of a named integral: "I1_0", "I3_0", "I1_i",
// "I3_i" (n >= 7) or "J1_0", "J5_0", "J1_i" (n = 6); i-names take the
// coordinate index through `axis`.
double leading_term(const std::string& name, const LeadingParams& lp, int axis = 0);

// derived coupling constants of the n=6 J5 row; quadrature::kappa keeps
// the tabulated reference form of the same balance
struct KappaSplit {
    double rho_part = 0.0;    // coefficient of delta^3
    double coupling_coef = 0.0;  // coefficient of alpha^2 mu^3 / t^2
};
KappaSplit engine_kappa_split(double f0, double u0, double rho_center);

// leading prediction of the Z_0-pairing sum and of lambda_0 itself
double predicted_b0(const LeadingParams& lp);
double predicted_lambda0(const LeadingParams& lp);  // divided by ||grad V_0||^2
// normalized i-row prediction: (I1_i + I3_i) * beta / mu^{n/2} / ||grad V_i||^2
double predicted_lambda_i_normalized(const LeadingParams& lp, int axis);

// grid values of the expansion integrals of the converged state
std::map<std::string, double> numeric_integrals(const Reducer& red, const ReductionState& st);

// limiting reduced map F(t,p): first entry the t-balance, entries 1..n
// proportional to grad H(p) t^3
std::vector<double> reduced_map_F(const LeadingParams& lp, double t, const std::vector<double>& p,
                                  const ModelConfig& cfg);

// unique positive root of the t-balance
double solve_t0(const LeadingParams& lp, double kappa_value = 0.0);

struct ZeroResult {
    double t_star = 0.0;
    std::vector<double> p_star;
    double residual_norm = 0.0;
    double seed_norm = 0.0;
    bool certificate = false;  // max u_k >= 1/2 delta^{-(n-2)/2}
    int pipeline_runs = 0;
};

ZeroResult find_zero(const ModelConfig& cfg, const GroundState& gs, const BackgroundProfile& bg,
                     const ReductionOptions& opt, double t_seed, const std::vector<double>& p_seed);

struct SweepRow {
    double mu = 0.0;
    std::string name;
    double closed_form = 0.0;
    double quadrature = 0.0;  // grid integral or NaN
    double pipeline = 0.0;    // pipeline value or NaN
    double rel_err = 0.0;
};

struct ConvergenceStudy {
    std::vector<SweepRow> rows;
    std::map<std::string, double> fitted_order;  // per comparison name
    std::map<std::string, bool> monotone;
};

ConvergenceStudy convergence_study(const ModelConfig& base_cfg, const std::vector<double>& mu_list,
                                   double t, const std::vector<double>& p,
                                   const ReductionOptions& opt, int workers = 1);

// pipeline helper: one full (t, p) run
ReductionState run_reduction(const ModelConfig& cfg, const GroundState& gs,
                             const BackgroundProfile& bg, double t, const std::vector<double>& p,
                             const ReductionOptions& opt);

// background profile sized for reduction runs of this config
BackgroundProfile make_background(const ModelConfig& cfg, const GroundState& gs,
                                  const ReductionOptions& opt, double t_min);

ModelConfig config_with_mu(const ModelConfig& base, double mu);

}  // namespace blowup
