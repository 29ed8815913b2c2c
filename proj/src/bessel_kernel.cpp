#include "fracspec/bessel_kernel.hpp"

#include "fracspec/error.hpp"

#include <cmath>

namespace fracspec {

namespace {

// log of the integrand, y = e^u
double log_integrand(double u, double beta, double rho2) { return u * beta - std::exp(u) - rho2 * std::exp(-u) / 4.0; }

double subordination_integral(double beta, double rho) {
    const double rho2 = rho * rho;
    // Peak of u*beta - e^u - rho^2 e^{-u}/4 solves y^2 - beta y - rho^2/4 = 0.
    double y;
    if (rho > 0.0) y = 0.5 * (beta + std::sqrt(beta * beta + rho2));
    else y = beta;
    require(y > 0.0, Errc::singularity, "kernel integral diverges");
    const double u0 = std::log(y);
    const double peak = log_integrand(u0, beta, rho2);

    // Walk outward until the integrand is e^{-45} below the peak.
    double lo = u0 - 0.5, hi = u0 + 0.5;
    while (log_integrand(lo, beta, rho2) > peak - 45.0) lo -= 0.5 + 0.5 * (u0 - lo);
    while (log_integrand(hi, beta, rho2) > peak - 45.0) hi += 0.5;

    auto trapezoid = [&](int panels) {
        const double h = (hi - lo) / panels;
        double acc = 0.5 * (std::exp(log_integrand(lo, beta, rho2) - peak) + std::exp(log_integrand(hi, beta, rho2) - peak));
        for (int i = 1; i < panels; ++i) acc += std::exp(log_integrand(lo + i * h, beta, rho2) - peak);
        return acc * h;
    };
    int panels = 64;
    double prev = trapezoid(panels);
    for (int it = 0; it < 16; ++it) {
        panels *= 2;
        const double cur = trapezoid(panels);
        if (std::abs(cur - prev) <= 1e-14 * std::abs(cur)) return cur * std::exp(peak);
        prev = cur;
    }
    fail(Errc::convergence, "Bessel kernel quadrature did not converge");
}

} // namespace

double bessel_kernel(double a, int n, double rho) {
    require(a > 0.0, Errc::precondition, "kernel order a must be positive");
    require(n >= 1, Errc::precondition, "dimension must be >= 1");
    require(rho >= 0.0, Errc::precondition, "radius must be nonnegative");
    const double prefactor = std::pow(2.0, -0.5 * n) / std::tgamma(0.5 * a);
    if (a <= n && rho < kBesselRhoMin)
        fail(Errc::singularity, "G_a is singular at 0 for a <= n; radius below the floor");
    if (rho == 0.0) return prefactor * std::tgamma(0.5 * (a - n));
    return prefactor * subordination_integral(0.5 * (a - n), rho);
}

BesselKernel::BesselKernel(double a, int n, double rho_lo, double rho_hi, int per_decade) : a_(a), n_(n) {
    require(a > 0.0 && n >= 1, Errc::precondition, "invalid kernel parameters");
    require(rho_lo >= kBesselRhoMin && rho_hi > rho_lo && per_decade >= 8, Errc::precondition, "invalid table range");
    log_lo_ = std::log(rho_lo);
    log_hi_ = std::log(rho_hi);
    const int nodes = static_cast<int>(std::ceil((log_hi_ - log_lo_) / std::log(10.0) * per_decade)) + 1;
    step_ = (log_hi_ - log_lo_) / (nodes - 1);
    table_.resize(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i)
        table_[static_cast<std::size_t>(i)] = std::log(bessel_kernel(a, n, std::exp(log_lo_ + i * step_)));

    if (a < n) c_ = std::pow(2.0, 0.5 * n - a) * std::tgamma(0.5 * (n - a)) / std::tgamma(0.5 * a);
    else if (a == n) c_ = std::pow(2.0, 1.0 - 0.5 * n) / std::tgamma(0.5 * n);
    if (a <= n) {
        const double eps = 1e-7;
        const double phi = a < n ? std::pow(eps, a - n) : -std::log(eps);
        c2_ = bessel_kernel(a, n, eps) - c_ * phi;
    } else {
        c2_ = bessel_kernel(a, n, 0.0);
    }
}

double BesselKernel::operator()(double rho) const {
    if (rho <= 0.0) {
        if (a_ > n_) return c2_;
        fail(Errc::singularity, "G_a is singular at 0 for a <= n");
    }
    const double t = std::log(rho);
    if (t < log_lo_ || t > log_hi_) return bessel_kernel(a_, n_, rho);
    // Cubic Lagrange interpolation in log G vs log rho.
    const double pos = (t - log_lo_) / step_;
    const int last = static_cast<int>(table_.size()) - 1;
    int i0 = static_cast<int>(std::floor(pos)) - 1;
    i0 = std::clamp(i0, 0, last - 3);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        double basis = 1.0;
        for (int j = 0; j < 4; ++j)
            if (j != i) basis *= (pos - (i0 + j)) / static_cast<double>(i - j);
        acc += basis * table_[static_cast<std::size_t>(i0 + i)];
    }
    return std::exp(acc);
}

} // namespace fracspec
