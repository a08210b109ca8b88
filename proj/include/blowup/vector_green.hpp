#pragma once

#include <array>
#include <string>
#include <vector>

#include "blowup/grid.hpp"
#include "blowup/model.hpp"

namespace blowup {

// Reference evaluator of the flat leading term of the Lame Green fields
// as tabulated in the source material:
//   G_i(y)_j = -(1/(4(n-1)w_{n-1})) |y|^{2-n} ((3n-2) d_ij + (n-2) yh_i yh_j).
std::vector<double> kelvin_green(int n, const std::vector<double>& y, int i);

// Flat Kelvin kernel used by the convolution route. Solves the Lame
// equation exactly: columns satisfy vecDelta G^(l) = delta_0 e_l with
//   G_jl(z) = |z|^{2-n} ((3n-2) d_jl + (n-2)^2 zh_j zh_l)
//             / (4 (n-1)(n-2) w_{n-1}).
std::vector<double> kelvin_green_exact(int n, const std::vector<double>& y, int i);

// L_g of the exact kernel column for unit source direction e:
//   (L G^(e))(z) = kap(n) |z|^{1-n} [ -(nh e + e nh) - (n-2) s nh nh + s delta ],
// s = e . nh. kelvin_lg_coefficient returns kap(n) = n / (2 (n-1) w_{n-1}).
double kelvin_lg_coefficient(int n);

// Trace-free response tensor field about a center, represented by three
// radial coefficient functions in the frame (mh = radial direction, zeta):
//   A(x) = a1 (mh z + z mh) + a2 (z.mh) mh mh + a3 (z.mh) delta.
struct LgTField {
    const RadialGrid* grid = nullptr;
    std::array<double, 2> zeta{};  // coupling direction in active-axis coordinates
    std::vector<double> a1, a2, a3;

    LgTField() = default;
    explicit LgTField(const RadialGrid& g)
        : grid(&g), a1(g.size(), 0.0), a2(g.size(), 0.0), a3(g.size(), 0.0) {}

    // |A|^2 at node i in direction with active components xang
    double frob2(int i, const std::array<double, 2>& xang) const {
        const double s = xang[0] * zeta[0] + xang[1] * zeta[1];
        const int n = grid->n;
        const double u1 = a1[i], u2 = a2[i], u3 = a3[i];
        return 2.0 * u1 * u1 +
               s * s * (2.0 * u1 * u1 + 4.0 * u1 * u2 + 4.0 * u1 * u3 + u2 * u2 +
                        2.0 * u2 * u3 + n * u3 * u3);
    }
    // trace / frobenius ratio at node i (the tensor trace is s (2a1+a2+n a3))
    double trace_ratio(int i) const;
    LgTField& axpy(double s, const LgTField& o);
};

// Pairwise polar-reduced kernel table on a grid: contribution of a unit
// source shell at radius rho to the coefficients at target radius d.
class KelvinTable {
  public:
    static KelvinTable build(const RadialGrid& grid);

    // convolve a radial source density q (nodal, about the same center,
    // direction zeta with amplitude folded into q) into the tensor field
    LgTField convolve(const std::vector<double>& q, const std::array<double, 2>& zeta) const;

    const RadialGrid& grid() const { return *grid_; }

  private:
    const RadialGrid* grid_ = nullptr;
    int stride_ = 0;
    std::vector<double> k1_, k2_, k3_;  // per (target, source): a1,a2,a3 kernels
};

// spec-facing name for the convolution route: response tensor of the
// momentum equation to a radial scalar source times a constant direction
inline LgTField convolve_LgT(const KelvinTable& table, const std::vector<double>& source,
                             const std::array<double, 2>& zeta) {
    return table.convolve(source, zeta);
}

// tensor CSV dump: components at x = r e_1 (mh = e_1), zeta in active frame
void write_tensor_csv(const std::string& path, const LgTField& f);

// Closed-form far-field of the bubble-driven response (asymptoThetak):
// full tensor at distance `dist` in direction xhat from the center, for
// coupling direction zeta and |X| at the center.
std::vector<std::vector<double>> theta_asymptotic(int n, double f_center, double X_center_norm,
                                                  const std::vector<double>& zeta,
                                                  const std::vector<double>& xhat, double dist);

// coefficient form of the same: {a1, a2, a3} with a1 = -K(n) f^{-n/2} |X| dist^{1-n}
std::array<double, 3> theta_asymptotic_coeffs(int n, double f_center, double X_center_norm,
                                              double dist);

struct LTBoundsReport {
    double best_C = 0.0;       // constant of the theta^{1-n} envelope
    double sup_weighted = 0.0; // sup |LT_k - LT| min(1, theta^{n-1}/S)
    double far_field = 0.0;    // sup |LT_k - LT| outside 10 sqrt(delta)
    double trace_max = 0.0;    // worst trace ratio
};

LTBoundsReport verify_LT_bounds(const LgTField& diff, double delta, double X_center,
                                double X_inf, double grad_X, double eps_k);

}  // namespace blowup
