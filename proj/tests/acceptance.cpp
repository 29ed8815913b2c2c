// Acceptance criteria; `acceptance N` runs criterion N, no argument runs all.
#include "fracspec/besov.hpp"
#include "fracspec/bessel_kernel.hpp"
#include "fracspec/experiment.hpp"
#include "fracspec/fractal_measure.hpp"
#include "fracspec/fractal_operator.hpp"
#include "fracspec/s_numbers.hpp"
#include "fracspec/spectral_report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace fracspec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const double kDim = std::log(2.0) / std::log(3.0);

SimilitudeIFS cantor() {
    Eigen::VectorXd a(1), b(1);
    a << 0.0;
    b << 2.0 / 3.0;
    return build_cantor_like(1, 2, 1.0 / 3.0, {a, b});
}

const FrequencyGrid kFreq{180000.0, 0.0};

double max_gap(const std::vector<double>& a, const std::vector<double>& b, std::size_t count) {
    double gap = 0.0;
    for (std::size_t k = 0; k < count; ++k) gap = std::max(gap, std::abs(a[k] / b[k] - 1.0));
    return gap;
}

Outcome criterion1() {
    const auto mu = quadrature(cantor(), 11);
    const auto rep = make_report(assemble_dmu_kernel(mu, 0.45), theoretical_exponent(1, kDim, 0.45, 2.0), 0.08,
                                 VerdictMode::two_sided, {10, 200});
    return {rep.pass, fmt("slope %.5f vs %.5f +- 0.08", rep.fit.slope, rep.theoretical_exponent)};
}

Outcome criterion2() {
    const auto mu = quadrature(cantor(), 11);
    const auto check = snumber_exponent_check(mu, 0.45, 2.0, kFreq, 0.05, {10, 200});
    const auto lambda = nonzero_moduli(eigen_spectrum(assemble_dmu_kernel(mu, 0.45)));
    std::vector<double> squared;
    for (double a : check.approximation_numbers) squared.push_back(a * a);
    const double gap = max_gap(squared, lambda, 50);
    return {check.pass && gap <= 0.02,
            fmt("a_k slope %.5f vs %.5f +- 0.05; max |a_k^2/lambda_k - 1| (k<=50) %.4f", check.fit.slope, check.expected, gap)};
}

Outcome criterion3() {
    const auto mu = quadrature(cantor(), 11);
    const double p = 1.5, s = 0.8 / p;
    const auto op = assemble_tmu_galerkin(separable_demo_symbol(-0.8, 0.5), s, p, mu, kFreq);
    const auto rep = make_report(op, theoretical_exponent(1, kDim, s, p), 0.08, VerdictMode::upper, {10, 200});

    const auto galerkin = nonzero_moduli(eigen_spectrum(assemble_tmu_galerkin(bessel_power_symbol(-0.9), 0.45, 2.0, mu, kFreq)));
    const auto nystrom = nonzero_moduli(eigen_spectrum(assemble_dmu_kernel(mu, 0.45)));
    const double gap = max_gap(galerkin, nystrom, 50);
    return {rep.pass && gap <= 0.02, fmt("upper-envelope slope %.5f <= %.5f; Galerkin vs Nystrom max gap (k<=50) %.4f",
                                         rep.fit.slope, rep.theoretical_exponent + 0.08, gap)};
}

Outcome criterion4() {
    const auto reports = carl_corpus_audit({});
    bool pass = true;
    std::string detail;
    for (const auto& r : reports) {
        pass = pass && r.pass && r.violations.empty();
        detail += fmt("%s: %zu pairs, %zu violations, worst slack %.3g; ", r.check.c_str(), r.evaluated, r.violations.size(),
                      r.worst_slack);
    }
    return {pass, detail + reports.front().note};
}

Outcome criterion5() {
    const auto reports = composition_law_audit({});
    bool pass = true;
    std::string detail;
    for (const auto& r : reports) {
        pass = pass && r.pass && r.violations.empty() && r.evaluated > 0;
        detail += fmt("%s %zu/%zu; ", r.check.c_str(), r.evaluated - r.violations.size(), r.evaluated);
    }
    return {pass, detail};
}

Outcome criterion6() {
    const Grid g(1, 1024, 64.0);
    const auto res = build_resolution(static_cast<int>(std::ceil(std::log2(g.nyquist()))) + 1, g);

    double lift_err = 0.0;
    for (unsigned long long seed = 1; seed <= 10; ++seed) {
        const auto f = random_band_limited(g, 12.0, seed);
        const auto back = lift(lift(f, 1.1), -1.1);
        for (std::size_t i = 0; i < g.size(); ++i) lift_err = std::max(lift_err, std::abs(back.values[i] - f.values[i]));
    }

    double bessel_err = 0.0;
    for (double rho = 0.0; rho <= 10.0; rho += 0.01)
        bessel_err = std::max(bessel_err, std::abs(bessel_kernel(2.0, 1, rho) - std::sqrt(std::numbers::pi / 2.0) * std::exp(-rho)));

    const auto mu = quadrature(cantor(), 12);
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<std::size_t> pick(0, mu.size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double lo = std::log(10.0 * mu.cell_diameter());
    double rmin = INFINITY, rmax = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double r = ball_measure_ratio(mu, mu.atom(pick(rng)), std::exp(lo * (1.0 - u(rng))));
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    const double band = rmax / rmin;
    const bool pass = res.residual <= 1e-12 && lift_err <= 1e-10 && bessel_err <= 1e-8 && band <= 8.0;
    return {pass, fmt("partition residual %.2e; lift round trip %.2e; Bessel error %.2e; ball-ratio band %.3f", res.residual,
                      lift_err, bessel_err, band)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome criterion7() {
    const fs::path base = fs::temp_directory_path() / "fracspec_acceptance_7";
    fs::remove_all(base);
    std::size_t files = 0, differ = 0;
    const std::vector<std::pair<std::string, std::function<RunResult(const ExperimentConfig&)>>> runs = {
        {"cantor_p2.json", run_spectrum},
        {"cantor_main_p15.json", run_spectrum},
        {"cantor_small.json", run_spectrum},
        {"cantor_small.json", run_audits},
        {"cantor_small.json", run_entropy_lab},
        {"cantor_small.json", [](const ExperimentConfig& c) { return run_convergence(c); }},
    };
    int index = 0;
    for (const auto& [name, run] : runs) {
        const fs::path a = base / std::to_string(index) / "a", b = base / std::to_string(index) / "b";
        ++index;
        const auto ra = run(load_config(fs::path(FRACSPEC_CONFIG_DIR) / name, {a, std::nullopt}));
        run(load_config(fs::path(FRACSPEC_CONFIG_DIR) / name, {b, std::nullopt}));
        for (const auto& f : ra.files) {
            ++files;
            if (slurp(f) != slurp(b / f.filename())) ++differ;
        }
    }
    fs::remove_all(base);
    return {files > 0 && differ == 0, fmt("%zu artifacts compared across two runs, %zu differ", files, differ)};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                           criterion5, criterion6, criterion7};
    std::vector<int> selected;
    if (argc > 1) {
        for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    } else {
        for (int i = 1; i <= 7; ++i) selected.push_back(i);
    }
    int failures = 0;
    for (int n : selected) {
        if (n < 1 || n > 7) {
            std::fprintf(stderr, "unknown criterion %d\n", n);
            return 2;
        }
        Outcome o{false, ""};
        try {
            o = criteria[static_cast<std::size_t>(n - 1)]();
        } catch (const std::exception& e) {
            o.detail = std::string("error: ") + e.what();
        }
        std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", n, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
