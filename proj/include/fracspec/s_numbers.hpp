#pragma once
//
// Approximation and entropy numbers of finite-dimensional operators, and
// audits of the s-number inequalities (duality, composition, Carl).
//

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace fracspec {

enum class SKind { approximation, entropy_upper, entropy_lower, entropy_exact };

std::string to_string(SKind kind);

struct SNumberSequence {
    SKind kind = SKind::approximation;
    std::vector<double> values; // values[k-1] is the k-th number
    nlohmann::json context = nlohmann::json::object();

    // k-th number, 1-based; zero past the stored range for approximation numbers.
    double at(std::size_t k) const;
    bool nonincreasing() const;
    nlohmann::json to_json() const;
};

SNumberSequence approximation_numbers_hilbert(const Eigen::MatrixXcd& matrix);
SNumberSequence approximation_numbers_diagonal(const std::vector<double>& sigma, double p);

enum class ScalarField { real, complex };

struct NormPair {
    double p_domain = 2.0;   // may be infinity
    double p_codomain = 2.0; // may be infinity
};

struct EntropyOptions {
    int points_1d = 4001;  // sample points per axis, by realized real dimension
    int points_2d = 301;
    int points_3d = 41;
    int lloyd_iterations = 30;
};

struct EntropyBounds {
    SNumberSequence lower;
    SNumberSequence upper;
    double net_inflation = 0.0; // radius added to the sample covering
};

// Brute-force covering of T(U_A) by 2^{k-1} balls of U_B, k = 1..k_max.
// Realized real dimension (domain and codomain) must be at most 3.
EntropyBounds entropy_numbers_bruteforce(const Eigen::MatrixXcd& matrix, int k_max, NormPair norms,
                                         ScalarField field = ScalarField::real, const EntropyOptions& options = {});

// Certified upper bounds for l_2 -> l_2 operators from singular values: a product of per-axis covers.
SNumberSequence entropy_upper_hilbert(const std::vector<double>& singular_values, int k_max, ScalarField field);

// sup_j 2^{-(k-1)/j} (sigma_1 ... sigma_j)^{1/j}.
double entropy_estimate_diagonal(const std::vector<double>& sigma, int k);

struct Violation {
    std::size_t k = 0;
    std::size_t l = 0; // second index for composition laws, 0 otherwise
    double lhs = 0.0;
    double rhs = 0.0;
};

struct AuditReport {
    std::string check;
    std::size_t k_lo = 1;
    std::size_t k_hi = 0;
    double worst_slack = INFINITY; // min of (rhs - lhs) / max(|rhs|, |lhs|) over pairs above tolerance
    bool pass = true;
    std::size_t evaluated = 0;
    std::vector<Violation> violations;
    std::string note;

    void record(std::size_t k, std::size_t l, double lhs, double rhs, double tol);
    nlohmann::json to_json() const;
};

// Plain Carl |lambda_k| <= sqrt(2) e_k and the geometric-mean refinement
// (prod_{j<=k} |lambda_j|)^{1/k} <= min_m 2^{(m-1)/(2k)} e_m over the supplied bounds.
std::vector<AuditReport> carl_audit(const std::vector<double>& eigen_moduli, const SNumberSequence& entropy_upper);

struct CarlCorpusSpec {
    int matrices = 100;
    int max_dim = 3;
    int k_max = 6;
    std::uint64_t seed = 20240601;
    EntropyOptions entropy_options{2001, 121, 25, 20};
};

// Carl audits over random complex square matrices on l_2. Entropy upper bounds are the
// minimum of the product cover and, where the realized dimension allows, the brute-force covering.
std::vector<AuditReport> carl_corpus_audit(const CarlCorpusSpec& spec);

double entropy_ideal_quasinorm(const std::vector<double>& e, double p, double q);

struct CompositionSpec {
    int triples = 50;
    int max_dim = 6;
    int entropy_triples = 6;  // real l_2 triples of size <= 2 for the entropy laws
    int entropy_k_max = 4;
    std::uint64_t seed = 20240601;
    EntropyOptions entropy_options{2001, 121, 25, 20};
};

// Duality and composition laws for a_k exactly via SVD; the entropy composition laws in bound-paired form.
std::vector<AuditReport> composition_law_audit(const CompositionSpec& spec);

// Report-only comparison of entropy bounds of diagonal T: l_p -> l_p and T': l_p' -> l_p'.
nlohmann::json entropy_duality_report(const std::vector<double>& sigma, double p, int k_max, const EntropyOptions& options);

// Random real matrix with entries uniform in [-1, 1].
Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng);

double uniform01(std::mt19937_64& rng);

} // namespace fracspec
