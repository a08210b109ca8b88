#pragma once

#include <array>
#include <string>
#include <vector>

#include "blowup/errors.hpp"
#include "blowup/special.hpp"

namespace blowup {

// Graded radial grid on [0, r_max]: nodes r_i = map(sigma_i) with sigma
// uniform on [0,1] and map(sigma) = dg (exp(a sigma) - 1). The grading
// scale dg resolves the concentration scale delta.
struct RadialGrid {
    int n = 0;          // ambient dimension
    int N = 0;          // number of interior nodes (1..N); 0 and N+1 are boundary
    double r_max = 0.0;
    double dg = 0.0;
    double a = 0.0;
    std::vector<double> r;       // size N+2, r[0]=0, r[N+1]=r_max
    std::vector<double> r_edge;  // size N+1, cell edges r_{i+1/2}, i=0..N
    std::vector<double> w;       // size N+2, cell volume weights (int r^{n-1} dr over cell)
    std::vector<double> wq;      // 4th-order quadrature weights for smooth pairings

    static RadialGrid make(int n, double r_max, double delta_resolve, int N_interior);

    int size() const { return N + 2; }
    // index of the node nearest to radius s
    int nearest(double s) const;
};

// Quadrature nodes on S^{n-1} reduced to an active subspace of dimension
// m <= 2: integrands may depend on the direction only through its
// components along the active axes. Weights sum to |S^{n-1}|.
struct AngularRule {
    int n = 0;
    int m = 0;
    std::vector<std::array<double, 2>> x;  // active-axis components of the direction
    std::vector<double> w;

    static AngularRule make(int n, int m, int points = 16, int azimuthal = 16);
    int size() const { return static_cast<int>(x.size()); }
};

// Scalar field truncated to spherical-harmonic modes l in {0,1} about the
// grid center: F(c + r w) = l0(r) + sum_a l1[a](r) (w . axis_a).
struct HarmonicField {
    const RadialGrid* grid = nullptr;
    std::vector<double> l0;
    std::vector<std::vector<double>> l1;  // one radial array per active axis

    HarmonicField() = default;
    explicit HarmonicField(const RadialGrid& g, int axes = 0)
        : grid(&g), l0(g.size(), 0.0), l1(axes, std::vector<double>(g.size(), 0.0)) {}

    int axes() const { return static_cast<int>(l1.size()); }
    double eval(int i, const std::array<double, 2>& xang) const {
        double v = l0[i];
        for (int a = 0; a < axes(); ++a) v += l1[a][i] * xang[a];
        return v;
    }
    void set_zero() {
        std::fill(l0.begin(), l0.end(), 0.0);
        for (auto& c : l1) std::fill(c.begin(), c.end(), 0.0);
    }
    HarmonicField& axpy(double s, const HarmonicField& o);
    HarmonicField& scale(double s);
};

// Project nodal angular samples (one value per rule node) onto l <= 1.
// vals[k] is the sample in direction k at a fixed radius.
struct AngularProjector {
    const AngularRule* rule;
    double inv_total;  // 1 / |S^{n-1}|
    explicit AngularProjector(const AngularRule& r);
    // returns {l0, l1_x, l1_y}
    std::array<double, 3> project(const std::vector<double>& vals) const;
};

void write_field_csv(const std::string& path, const HarmonicField& f);

}  // namespace blowup
