#pragma once
//
// Littlewood-Paley machinery on a uniform periodic grid.
//
// The grid covers [-R/2, R/2)^n with N points per axis.  Fourier
// multipliers act on the DFT coefficients, with frequency index k mapped to
// xi_k = 2 pi k / R for signed k in [-N/2, N/2).
//

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace fracspec {

struct Grid {
    int dim = 1;
    int points = 256; // per axis, power of two
    double extent = 32.0;

    Grid() = default;
    Grid(int dim, int points, double extent);

    std::size_t size() const;
    double spacing() const { return extent / points; }
    double cell_volume() const;
    std::vector<int> dims() const { return std::vector<int>(static_cast<std::size_t>(dim), points); }

    Eigen::VectorXd x(std::size_t flat) const;
    Eigen::VectorXd xi(std::size_t flat) const;
    double xi_norm(std::size_t flat) const { return xi(flat).norm(); }
    // Largest |xi| component represented on the grid.
    double nyquist() const;
};

struct GridFunction {
    Grid grid;
    std::vector<std::complex<double>> values;

    GridFunction() = default;
    explicit GridFunction(Grid g) : grid(g), values(g.size()) {}

    static GridFunction sample(const Grid& g, const std::function<std::complex<double>(const Eigen::VectorXd&)>& f);
};

// phi_0 profile: 1 on [0,1], 0 on [3/2, inf), exp(-1/t) glue in between.
double smooth_bump(double t);
// phi_j(|xi|) per Eq. (1.9).
double dyadic_piece(int j, double r);

struct DyadicResolution {
    int j_max = 1;
    Grid grid;
    std::vector<std::vector<double>> pieces; // pieces[j][flat]
    double residual = 0.0; // max |sum_j phi_j - 1| on |xi| <= 2^{j_max - 1}
};

DyadicResolution build_resolution(int j_max, const Grid& grid);

struct BesovParams {
    double s = 0.0;
    double p = 2.0; // may be infinity
    double q = 2.0; // may be infinity
};

// Fourier multiplier m(xi) applied on the grid.
GridFunction apply_multiplier(const GridFunction& f, const std::function<double(const Eigen::VectorXd&)>& m);

// Riemann-sum L_p norm; p = infinity gives the max.
double lp_norm(const GridFunction& f, double p);

double besov_norm(const GridFunction& f, const BesovParams& params, const DyadicResolution& res);

// (w_alpha f^)^v with w_alpha(xi) = (1 + |xi|^2)^{alpha/2}.
GridFunction lift(const GridFunction& f, double alpha);

// Classical (int (1+|xi|^2)^s |f^|^2)^{1/2} on the same grid, up to a fixed constant.
double sobolev_norm(const GridFunction& f, double s);

// Random band-limited function: smooth compactly supported spectrum inside |xi| <= band.
GridFunction random_band_limited(const Grid& g, double band, unsigned long long seed);

} // namespace fracspec
