#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <vector>

#include "blowup/grid.hpp"
#include "blowup/model.hpp"

namespace blowup {

// Finite-volume discretization of Delta + V on one spherical-harmonic
// mode l in {0,1}: -u'' - (n-1)/r u' + l(l+n-2)/r^2 u + V u, with the
// natural condition at 0 for l=0, Dirichlet for l=1, Dirichlet at r_max.
// The stored matrix is the symmetric quadratic-form matrix; the mass is
// the diagonal of cell volumes.
class ModeOperator {
  public:
    ModeOperator(const RadialGrid& grid, int l, const std::vector<double>& potential);

    const RadialGrid& grid() const { return *grid_; }
    int mode() const { return l_; }
    int rows() const { return static_cast<int>(idx_.size()); }
    int first_node() const { return l_ == 0 ? 0 : 1; }

    // weak-form solve: (Delta + V) u = g, g nodal; returns nodal values
    // (size N+2 with boundary zeros filled in).
    std::vector<double> solve(const std::vector<double>& g) const;
    // raw solve S u = b with b indexed by unknowns
    Eigen::VectorXd solve_raw(const Eigen::VectorXd& b) const;
    // apply the differential operator: ((Delta + V) u)_i = (S u)_i / w_i
    std::vector<double> apply(const std::vector<double>& u) const;
    // quadratic form <u, (Delta + V) v> including boundary edges
    double form(const std::vector<double>& u, const std::vector<double>& v) const;

    const Eigen::SparseMatrix<double>& matrix() const { return S_; }
    double max_asymmetry() const;

    const std::vector<double>& potential() const { return pot_; }

  private:
    const RadialGrid* grid_;
    int l_;
    std::vector<int> idx_;  // unknown -> node index
    std::vector<double> pot_;
    Eigen::SparseMatrix<double> S_;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

// Pure stiffness pairing sum_edges r^{n-1} du dv / dr + l-term, using the
// nodal values including boundaries.
double stiffness_pair(const RadialGrid& g, int l, const std::vector<double>& u,
                      const std::vector<double>& v);

// Mass pairing int u v r^{n-1} dr with the cell weights.
double mass_pair(const RadialGrid& g, const std::vector<double>& u, const std::vector<double>& v);

// Green function of Delta + V with a unit point source at the node
// nearest r_source (weak delta). Returns nodal values.
std::vector<double> green_function(const ModeOperator& op, double r_source);

// Smallest eigenvalue of the generalized problem S x = lambda M x
// (discrete quadratic form), by shifted inverse power iteration.
double coercivity_margin(const ModeOperator& op, int max_iter = 3000, double tol = 1e-10);

// Linearized operator of the scalar equation at background u applied to a
// harmonic field, mode by mode:
//   L_u v = Delta v + [h - (2*-1) f u^{2*-2} + (2*+1) rho u^{-2*-2}] v.
// All coefficient arrays are nodal on the field's grid.
HarmonicField apply_Lu(const RadialGrid& grid, const std::vector<double>& h_tot,
                       const std::vector<double>& f, const std::vector<double>& rho,
                       const std::vector<double>& u, double crit, const HarmonicField& v);

// Radial background profile about the origin solving
//   Delta u + h(r) u = f(r) u^{2*-1} + rho0 u^{-2*-1},  u(r_max) = u0.
class BackgroundProfile {
  public:
    BackgroundProfile() = default;
    static BackgroundProfile solve(const ModelConfig& cfg, const GroundState& gs, double r_max,
                                   int N_interior);

    double value(double r) const;
    double deriv(double r) const;
    // Laplacian through the equation (pointwise identity).
    double laplacian(double r) const;
    double u_infinity() const { return u0_; }
    const RadialGrid& grid() const { return grid_; }
    const std::vector<double>& nodal() const { return u_; }

  private:
    RadialGrid grid_;
    ModelConfig cfg_;
    double u0_ = 0.0;
    std::vector<double> u_;
    std::vector<double> spp_;  // spline second derivatives
    void build_spline();
};

}  // namespace blowup
