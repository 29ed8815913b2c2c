#pragma once
//
// Discretized operators over a fractal quadrature: the Fourier transform of
// f mu, the trace operator, the Bessel-kernel operator D^mu_s and the
// Galerkin compression of T^mu_tau onto atom space.
//
// Atom-space operators act on coefficient vectors indexed by atoms.  The
// symmetric forms use sqrt(w)-weighted coordinates so that l_2 of the
// coefficients is L_2(mu).
//

#include "fracspec/bessel_kernel.hpp"
#include "fracspec/fractal_measure.hpp"
#include "fracspec/psido.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace fracspec {

struct SpaceDescriptor {
    std::string kind; // "atom-space", "fourier-modes" or "grid-space"
    std::size_t size = 0;
    double p = 2.0;
    double s = 0.0;

    nlohmann::json to_json() const { return {{"kind", kind}, {"size", size}, {"p", p}, {"s", s}}; }
};

struct DiscretizedOperator {
    Eigen::MatrixXcd matrix;
    SpaceDescriptor domain;
    SpaceDescriptor codomain;
    nlohmann::json assembly = nlohmann::json::object();
    bool symmetric = false;
    // Real symmetric matrix with the same spectrum, when the assembly knows one.
    std::optional<Eigen::MatrixXd> hermitian_similar;

    // Sets the symmetric flag iff max asymmetry <= 1e-10 * max |entry|.
    void update_symmetric_flag();
};

struct FrequencyGrid {
    double cutoff = 1000.0; // Xi; the smooth cutoff phi_0(|xi| / Xi) vanishes beyond 1.5 Xi
    double spacing = 0.0;   // 0 selects pi / (4 * hull diameter)
};

// F(f mu)(xi) = (2 pi)^{-n/2} sum_j w_j f(gamma_j) e^{-i gamma_j . xi}.
std::vector<std::complex<double>> fourier_of_fmu(std::span<const std::complex<double>> values,
                                                 const FractalMeasure& measure,
                                                 const std::vector<Eigen::VectorXd>& xi);

struct AtomLattice {
    double origin = 0.0;
    double delta = 0.0;
    std::vector<long> index; // gamma_j = origin + index[j] * delta
};

// One-dimensional atoms on a common lattice, if any.
std::optional<AtomLattice> detect_lattice(const FractalMeasure& measure);

// Explicit trace matrix from H^s-normalized Fourier modes xi_l to sqrt(w)-weighted atom values:
// T_jl = sqrt(w_j) (2 pi)^{-n/2} h^{n/2} w_{-s}(xi_l) sqrt(phi_0(|xi_l| / Xi)) e^{i gamma_j . xi_l}.
DiscretizedOperator assemble_trace_operator(const FractalMeasure& measure, double s, double p,
                                            const FrequencyGrid& freq,
                                            std::size_t entry_budget = std::size_t{1} << 24);

// Gram matrix T T* of the trace operator, real symmetric; squared singular values of T are its eigenvalues.
DiscretizedOperator trace_gram(const FractalMeasure& measure, double s, double p, const FrequencyGrid& freq);

inline constexpr int kSelfInteractionDepth = 4;

// Nystrom matrix sqrt(w_j) (2 pi)^{-n/2} G_{2s}(|gamma_j - gamma_k|) sqrt(w_k) with self-interaction diagonal.
DiscretizedOperator assemble_dmu_kernel(const FractalMeasure& measure, double s);

// Diagonal self-interaction value (1/w) int int_{cell x cell} G dmu dmu for a level-L cell, without (2 pi)^{-n/2}.
double self_interaction(const FractalMeasure& measure, const BesselKernel& kernel, int depth = kSelfInteractionDepth);

// M_jk = (2 pi)^{-n} w_k int e^{i (gamma_j - gamma_k) xi} tau(gamma_j, xi) phi_0(|xi| / Xi) dxi.
DiscretizedOperator assemble_tmu_galerkin(const Symbol& sym, double s, double p, const FractalMeasure& measure,
                                          const FrequencyGrid& freq);

// Throws window-violation unless lo < value <= hi.
void check_window(double value, double lo, double hi, const std::string& what);

} // namespace fracspec
