#pragma once
//
// Config-driven experiments: build measure, assemble, eigensolve, fit, audit, persist.
//

#include "fracspec/fractal_operator.hpp"
#include "fracspec/psido.hpp"
#include "fracspec/s_numbers.hpp"
#include "fracspec/spectral_report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace fracspec {

inline constexpr int kSchemaVersion = 1;

struct FractalSpec {
    int n = 1;
    int m = 2;
    double ratio = 1.0 / 3.0;
    std::vector<Eigen::VectorXd> translations;
    int level = 11;
};

enum class OperatorKind { dmu_kernel, galerkin, trace };

struct AnalysisSpec {
    OperatorKind op = OperatorKind::dmu_kernel;
    double s = 0.45;
    double p = 2.0;
    std::string symbol = "bessel_power";
    nlohmann::json symbol_params = nlohmann::json::object();
    FrequencyGrid freq;
    bool cross_check = false; // Galerkin at p = 2: compare with the Nystrom spectrum
};

struct FitSpec {
    WindowPolicy window;
    double tolerance = 0.08;
    VerdictMode mode = VerdictMode::two_sided;
};

struct SNumberSpec {
    double tolerance = 0.05;
    double transference_tolerance = 0.02;
    std::size_t transference_k = 50;
    WindowPolicy window{10, 200};
};

struct AuditSpec {
    bool spectrum_carl = true;
    int spectrum_k_max = 16;
    bool corpus = true;
    CarlCorpusSpec carl;
    bool composition = true;
    CompositionSpec laws;
    bool duality_report = true;
};

struct EntropyLabCase {
    Eigen::MatrixXcd matrix;
    NormPair norms;
    ScalarField field = ScalarField::real;
};

struct EntropyLabSpec {
    std::vector<EntropyLabCase> cases;
    int k_max = 5;
    EntropyOptions options;
};

struct ValidateSpec {
    ProbeSpec probes;
    int max_order = 2;
    std::optional<double> declared_delta; // replaces the catalog symbol's type delta
};

struct ExperimentConfig {
    std::string name = "experiment";
    FractalSpec fractal;
    AnalysisSpec analysis;
    FitSpec fit;
    SNumberSpec snumbers;
    AuditSpec audits;
    EntropyLabSpec entropy_lab;
    ValidateSpec validate;
    std::vector<int> levels; // convergence study
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 20240601;
    std::size_t atom_budget = 8192;

    std::string hash; // FNV-1a of the canonical config without output_dir
    double dimension = 0.0;

    nlohmann::json provenance() const;
};

struct ConfigOverrides {
    std::optional<std::filesystem::path> output_dir;
    std::optional<double> tolerance;
};

// Unknown keys, bad types and violated parameter windows are config errors.
ExperimentConfig parse_config(nlohmann::json doc, const ConfigOverrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

SimilitudeIFS build_ifs(const FractalSpec& spec);
FractalMeasure build_measure(const ExperimentConfig& config, int level);
DiscretizedOperator build_operator(const ExperimentConfig& config, const FractalMeasure& measure);
double expected_exponent(const ExperimentConfig& config);

struct RunResult {
    bool pass = false;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<std::filesystem::path> files;
};

RunResult run_spectrum(const ExperimentConfig& config);
RunResult run_convergence(const ExperimentConfig& config, std::vector<int> levels = {});
RunResult run_audits(const ExperimentConfig& config);
RunResult run_trace_snumbers(const ExperimentConfig& config);
RunResult run_entropy_lab(const ExperimentConfig& config);
RunResult run_validate_symbol(const ExperimentConfig& config);

// Audit bundle of an already computed spectrum; used by run_audits.
nlohmann::json audit_bundle(const ExperimentConfig& config, const std::vector<std::complex<double>>& spectrum,
                            const std::vector<double>& singular_values, bool& pass);

} // namespace fracspec
