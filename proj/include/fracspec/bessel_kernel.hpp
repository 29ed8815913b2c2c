#pragma once
//
// Bessel potential kernel G_a: the inverse Fourier transform (unitary
// convention) of (1 + |xi|^2)^{-a/2} in R^n, as a function of rho = |x|.
// Convolution with (2 pi)^{-n/2} G_a realizes the multiplier w_{-a}.
//

#include <vector>

namespace fracspec {

inline constexpr double kBesselRhoMin = 1e-12;

// Direct evaluation by the subordination integral
//   G_a(rho) = 2^{-n/2} / Gamma(a/2) * int_R exp(u (a-n)/2 - e^u - rho^2 e^{-u} / 4) du.
double bessel_kernel(double a, int n, double rho);

class BesselKernel {
public:
    // Tabulated on log-spaced radii in [rho_lo, rho_hi]; direct evaluation outside.
    BesselKernel(double a, int n, double rho_lo = 1e-9, double rho_hi = 50.0, int per_decade = 256);

    double order() const { return a_; }
    int ambient_dim() const { return n_; }
    double operator()(double rho) const;

    // Leading behaviour near zero: c * rho^{a-n} (a < n) or c * (-log rho) (a = n); zero when a > n.
    double local_coefficient() const { return c_; }
    // Regular remainder G(rho) - c * phi(rho) as rho -> 0.
    double regular_part() const { return c2_; }
    bool singular() const { return a_ <= n_; }
    bool logarithmic() const { return a_ == n_; }

private:
    double a_;
    int n_;
    double log_lo_, log_hi_, step_;
    std::vector<double> table_; // log G at log rho nodes
    double c_ = 0.0;
    double c2_ = 0.0;
};

} // namespace fracspec
