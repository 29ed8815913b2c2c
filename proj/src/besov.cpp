#include "fracspec/besov.hpp"

#include "fracspec/error.hpp"
#include "fracspec/fft.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace fracspec {

Grid::Grid(int dim_, int points_, double extent_) : dim(dim_), points(points_), extent(extent_) {
    require(dim >= 1 && dim <= 3, Errc::precondition, "grid dimension must be 1..3");
    require(points >= 2 && (points & (points - 1)) == 0, Errc::precondition, "grid points must be a power of two");
    require(extent > 0.0, Errc::precondition, "grid extent must be positive");
}

std::size_t Grid::size() const {
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(points);
    return total;
}

double Grid::cell_volume() const { return std::pow(spacing(), dim); }

Eigen::VectorXd Grid::x(std::size_t flat) const {
    Eigen::VectorXd out(dim);
    for (int a = dim - 1; a >= 0; --a) {
        out[a] = -0.5 * extent + static_cast<double>(flat % static_cast<std::size_t>(points)) * spacing();
        flat /= static_cast<std::size_t>(points);
    }
    return out;
}

Eigen::VectorXd Grid::xi(std::size_t flat) const {
    Eigen::VectorXd out(dim);
    const double unit = 2.0 * std::numbers::pi / extent;
    for (int a = dim - 1; a >= 0; --a) {
        long k = static_cast<long>(flat % static_cast<std::size_t>(points));
        if (k >= points / 2) k -= points;
        out[a] = unit * static_cast<double>(k);
        flat /= static_cast<std::size_t>(points);
    }
    return out;
}

double Grid::nyquist() const { return std::numbers::pi * points / extent; }

GridFunction GridFunction::sample(const Grid& g, const std::function<std::complex<double>(const Eigen::VectorXd&)>& f) {
    GridFunction out(g);
    for (std::size_t i = 0; i < g.size(); ++i) out.values[i] = f(g.x(i));
    return out;
}

double smooth_bump(double t) {
    t = std::abs(t);
    if (t <= 1.0) return 1.0;
    if (t >= 1.5) return 0.0;
    auto g = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
    const double u = (t - 1.0) / 0.5;
    const double a = g(1.0 - u);
    return a / (a + g(u));
}

double dyadic_piece(int j, double r) {
    if (j == 0) return smooth_bump(r);
    return smooth_bump(std::ldexp(r, -j)) - smooth_bump(std::ldexp(r, -j + 1));
}

DyadicResolution build_resolution(int j_max, const Grid& grid) {
    require(j_max >= 1, Errc::precondition, "J_max must be >= 1");
    DyadicResolution res;
    res.j_max = j_max;
    res.grid = grid;
    res.pieces.assign(static_cast<std::size_t>(j_max) + 1, std::vector<double>(grid.size()));
    const double inside = std::ldexp(1.0, j_max - 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid.xi_norm(i);
        double sum = 0.0;
        for (int j = 0; j <= j_max; ++j) {
            res.pieces[static_cast<std::size_t>(j)][i] = dyadic_piece(j, r);
            sum += res.pieces[static_cast<std::size_t>(j)][i];
        }
        if (r <= inside) res.residual = std::max(res.residual, std::abs(sum - 1.0));
    }
    return res;
}

namespace {

std::vector<std::complex<double>> spectrum(const GridFunction& f) {
    auto data = f.values;
    fft::forward(data, f.grid.dims());
    return data;
}

GridFunction from_spectrum(const Grid& g, std::vector<std::complex<double>> data) {
    fft::backward(data, g.dims());
    const double scale = 1.0 / static_cast<double>(g.size());
    for (auto& v : data) v *= scale;
    GridFunction out(g);
    out.values = std::move(data);
    return out;
}

} // namespace

GridFunction apply_multiplier(const GridFunction& f, const std::function<double(const Eigen::VectorXd&)>& m) {
    auto data = spectrum(f);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= m(f.grid.xi(i));
    return from_spectrum(f.grid, std::move(data));
}

double lp_norm(const GridFunction& f, double p) {
    if (std::isinf(p)) {
        double mx = 0.0;
        for (const auto& v : f.values) mx = std::max(mx, std::abs(v));
        return mx;
    }
    require(p > 0.0, Errc::precondition, "p must be positive");
    double acc = 0.0;
    for (const auto& v : f.values) acc += std::pow(std::abs(v), p);
    return std::pow(acc * f.grid.cell_volume(), 1.0 / p);
}

double besov_norm(const GridFunction& f, const BesovParams& params, const DyadicResolution& res) {
    require(f.grid.size() == res.grid.size() && f.grid.extent == res.grid.extent && f.grid.dim == res.grid.dim,
            Errc::shape_mismatch, "resolution was built for a different grid");
    require(params.q > 0.0 && params.p > 0.0, Errc::precondition, "p and q must be positive");
    const auto data = spectrum(f);

    double total = 0.0, beyond = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double e = std::norm(data[i]);
        total += e;
        const double outside = 1.0 - smooth_bump(std::ldexp(f.grid.xi_norm(i), -res.j_max));
        beyond += e * outside * outside;
    }
    if (total == 0.0) return 0.0;
    if (beyond > 1e-8 * total)
        fail(Errc::band_overflow, "spectral energy beyond the last dyadic shell is " +
                                      std::to_string(beyond / total) + " of the total");

    double acc = 0.0;
    for (int j = 0; j <= res.j_max; ++j) {
        const auto& piece = res.pieces[static_cast<std::size_t>(j)];
        std::vector<std::complex<double>> block(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) block[i] = data[i] * piece[i];
        const double term = std::exp2(j * params.s) * lp_norm(from_spectrum(f.grid, std::move(block)), params.p);
        if (std::isinf(params.q)) acc = std::max(acc, term);
        else acc += std::pow(term, params.q);
    }
    return std::isinf(params.q) ? acc : std::pow(acc, 1.0 / params.q);
}

GridFunction lift(const GridFunction& f, double alpha) {
    if (alpha == 0.0) return f;
    return apply_multiplier(f, [alpha](const Eigen::VectorXd& xi) { return std::pow(1.0 + xi.squaredNorm(), alpha / 2); });
}

double sobolev_norm(const GridFunction& f, double s) {
    const auto data = spectrum(f);
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        acc += std::pow(1.0 + f.grid.xi(i).squaredNorm(), s) * std::norm(data[i]);
    // Parseval: sum |f|^2 dx = dx^n / N^n * sum |F|^2.
    return std::sqrt(acc * f.grid.cell_volume() / static_cast<double>(f.grid.size()));
}

GridFunction random_band_limited(const Grid& g, double band, unsigned long long seed) {
    // Sum of four Gaussian wave packets; spectral tails beyond the band fall below e^{-40}.
    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const double width = 2.0 * std::sqrt(80.0) / band;
    GridFunction out(g);
    for (int packet = 0; packet < 4; ++packet) {
        Eigen::VectorXd center(g.dim), kappa(g.dim);
        for (int a = 0; a < g.dim; ++a) {
            center[a] = (uniform() - 0.5) * g.extent / 4.0;
            kappa[a] = (uniform() - 0.5) * band / std::sqrt(static_cast<double>(g.dim));
        }
        const std::complex<double> amp(2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Eigen::VectorXd y = g.x(i) - center;
            out.values[i] += amp * std::exp(-y.squaredNorm() / (2.0 * width * width)) *
                             std::polar(1.0, kappa.dot(g.x(i)));
        }
    }
    return out;
}

} // namespace fracspec
