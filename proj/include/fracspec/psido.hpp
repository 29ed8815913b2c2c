#pragma once
//
// Hormander-class symbols tau(x, xi) and their application on grid functions.
//
// Operators use the unitary Fourier convention, so tau == 1 is the identity:
//   (T f)(x) = (2 pi)^{-n/2} int e^{i x xi} tau(x, xi) f^(xi) dxi.
//

#include "fracspec/besov.hpp"

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace fracspec {

using SymbolFn = std::function<std::complex<double>(const Eigen::VectorXd& x, const Eigen::VectorXd& xi)>;

struct SeparableTerm {
    std::function<std::complex<double>(const Eigen::VectorXd& x)> a;
    std::function<std::complex<double>(const Eigen::VectorXd& xi)> b;
};

struct Symbol {
    std::string name;
    nlohmann::json params = nlohmann::json::object();
    SymbolFn evaluate;
    double order = 0.0;      // sigma
    double type_delta = 0.0; // delta in [0,1]
    int max_derivative_depth = 3;
    bool x_independent = false;
    std::vector<SeparableTerm> terms; // tau = sum_t a_t(x) b_t(xi) when non-empty

    std::complex<double> operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const { return evaluate(x, xi); }
    bool separable() const { return !terms.empty(); }
};

// w_alpha(xi) = (1 + |xi|^2)^{alpha/2}.
double bessel_weight(double alpha, const Eigen::VectorXd& xi);

Symbol identity_symbol();
Symbol bessel_power_symbol(double sigma);
// w_sigma(xi) * (1 + amplitude * cos x_1).
Symbol separable_demo_symbol(double sigma, double amplitude);
// phi_0(|xi|) + sum_{j>=1} e^{i 2^j x_1} phi_j(|xi|), order 0, delta = 1.
Symbol exotic_demo_symbol();
// Catalog lookup; unknown names or parameters raise a config error.
Symbol symbol_from_catalog(const std::string& name, const nlohmann::json& params);

struct ProbeSpec {
    int dim = 1;
    double x_extent = 2.0 * 3.141592653589793;
    double xi_cutoff = 1000.0;
    int x_points = 8;       // per axis
    int xi_per_decade = 128; // geometric |xi| probes from 1e-2 up to the cutoff
};

struct DerivativeBound {
    std::vector<int> alpha; // x multi-index
    std::vector<int> gamma; // xi multi-index
    double c_hat = 0.0;
    double c_hat_refined = 0.0;
    double richardson = 0.0; // max |D(h) - D(h/2)| / weight, relative to c_hat
    bool stable = true;
};

struct SymbolValidation {
    std::string symbol;
    double order = 0.0;
    double type_delta = 0.0;
    std::vector<DerivativeBound> bounds;
    bool pass = true;
    std::string reason;

    const DerivativeBound* find(const std::vector<int>& alpha, const std::vector<int>& gamma) const;
    nlohmann::json to_json() const;
};

// Finite-difference check of |D^alpha_x D^gamma_xi tau| <= c (1+|xi|)^{sigma - |gamma| + delta |alpha|}.
SymbolValidation validate_symbol(const Symbol& sym, const ProbeSpec& probes, int max_order);

GridFunction apply_psido(const Symbol& sym, const GridFunction& f, double freq_cutoff);

// tau(x, xi) * (1 + |xi|^2)^{-sigma/2}, declared order 0.
Symbol compose_lifted_symbol(const Symbol& sym);

struct BoundednessReport {
    double max_ratio = 0.0;         // on the given grid
    double max_ratio_refined = 0.0; // after spectral refinement to 2N points per axis
    double growth = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
    bool pass = false;

    nlohmann::json to_json() const;
};

BoundednessReport boundedness_probe(const Symbol& sym, const BesovParams& params, const std::vector<GridFunction>& corpus);

// Band-limited interpolation onto a grid with the same extent and factor times more points.
GridFunction refine_grid(const GridFunction& f, int factor);

} // namespace fracspec
