#pragma once

#include "fracspec/fractal_measure.hpp"
#include "fracspec/fractal_operator.hpp"

#include <complex>
#include <optional>
#include <vector>

#include <json.hpp>

namespace fracspec {

// Full spectrum ordered by modulus, ties by real part then imaginary part (both descending).
std::vector<std::complex<double>> eigen_spectrum(const DiscretizedOperator& op);

// Moduli of the ordered spectrum with entries below 1e-12 |lambda_1| set to zero.
std::vector<double> nonzero_moduli(const std::vector<std::complex<double>>& spectrum);

// -1 + (n - sp)/d.
double theoretical_exponent(int n, double d, double s, double p);
// -1/p + (n/p - s)/d.
double trace_exponent(int n, double d, double s, double p);

struct WindowPolicy {
    std::size_t k_lo = 10;
    std::size_t k_hi = 0; // 0 selects min(0.2 * count, 400)
};

struct FitRecord {
    std::size_t k_lo = 0;
    std::size_t k_hi = 0;
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // RMS of log residuals
    std::string method = "least-squares";

    nlohmann::json to_json() const;
};

// Least-squares slope of log|lambda_k| against log k.
FitRecord fit_decay_exponent(const std::vector<double>& moduli, const WindowPolicy& window = {});
// 95th-percentile quantile regression of log|lambda_k| against log k.
FitRecord fit_upper_envelope(const std::vector<double>& moduli, const WindowPolicy& window = {}, double quantile = 0.95);

enum class VerdictMode { two_sided, upper };

struct SpectrumReport {
    std::vector<std::complex<double>> eigenvalues;
    FitRecord fit;
    double theoretical_exponent = 0.0;
    double tolerance = 0.08;
    VerdictMode mode = VerdictMode::two_sided;
    bool pass = false;
    nlohmann::json provenance = nlohmann::json::object();

    nlohmann::json to_json() const;
};

SpectrumReport make_report(const DiscretizedOperator& op, double theoretical, double tolerance, VerdictMode mode,
                           const WindowPolicy& window = {});

struct SNumberCheck {
    std::vector<double> approximation_numbers;
    FitRecord fit;
    double expected = 0.0;
    double tolerance = 0.05;
    bool pass = false;

    nlohmann::json to_json() const;
};

// a_k of the trace operator from the eigenvalues of its Gram matrix, with exponent fit.
SNumberCheck snumber_exponent_check(const FractalMeasure& measure, double s, double p, const FrequencyGrid& freq,
                                    double tolerance = 0.05, const WindowPolicy& window = {10, 200});

} // namespace fracspec
