#include "fracspec/error.hpp"
#include "fracspec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

namespace {

enum Exit { kPass = 0, kVerdictFail = 1, kConfigError = 2, kNumericalError = 3 };

struct Job {
    std::string command;
    std::string config;
    fracspec::ConfigOverrides overrides;
    std::vector<int> levels;
};

std::mutex print_mutex;

int run_job(const Job& job) {
    using namespace fracspec;
    int code = kNumericalError;
    std::string line;
    try {
        const auto config = load_config(job.config, job.overrides);
        RunResult result;
        if (job.command == "spectrum") result = run_spectrum(config);
        else if (job.command == "convergence") result = run_convergence(config, job.levels);
        else if (job.command == "audits") result = run_audits(config);
        else if (job.command == "trace-snumbers") result = run_trace_snumbers(config);
        else if (job.command == "entropy-lab") result = run_entropy_lab(config);
        else result = run_validate_symbol(config);
        code = result.pass ? kPass : kVerdictFail;
        line = job.command + " " + job.config + ": " + (result.pass ? "PASS" : "FAIL");
        for (const auto& f : result.files) line += "\n  wrote " + f.string();
    } catch (const Error& e) {
        code = e.is_config_error() || e.code() == Errc::io ? kConfigError : kNumericalError;
        line = job.command + " " + job.config + ": error: " + e.what();
    } catch (const std::exception& e) {
        line = job.command + " " + job.config + ": error: " + e.what();
    }
    std::lock_guard<std::mutex> lock(print_mutex);
    (code == kPass || code == kVerdictFail ? std::cout : std::cerr) << line << std::endl;
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral experiments for operators on fractal measures"};
    app.set_version_flag("--version", std::string(fracspec::kVersion));
    app.require_subcommand(1, 1);

    std::vector<std::string> configs;
    std::string out;
    unsigned jobs = 1;
    double tolerance = 0.0;
    std::vector<int> levels;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"spectrum", "eigenvalues, decay fit and verdict"},
        {"convergence", "fitted slope across quadrature levels"},
        {"audits", "Carl, composition and duality audits"},
        {"trace-snumbers", "approximation numbers of the trace operator"},
        {"entropy-lab", "brute-force covering bounds for small matrices"},
        {"validate-symbol", "numerical symbol-class check"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", configs, "experiment config (JSON); repeat for several")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory, overrides output_dir");
        sub->add_option("--jobs", jobs, "configs run concurrently")->check(CLI::PositiveNumber);
        sub->add_option("--tolerance", tolerance, "fit tolerance, overrides fit.tolerance")->check(CLI::PositiveNumber);
        if (name == "convergence") sub->add_option("--levels", levels, "quadrature levels, ascending");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    std::vector<Job> queue;
    const std::string command = app.get_subcommands().front()->get_name();
    for (const auto& path : configs) {
        Job job{command, path, {}, levels};
        if (!out.empty()) {
            std::filesystem::path dir = out;
            if (configs.size() > 1) dir /= std::filesystem::path(path).stem();
            job.overrides.output_dir = dir;
        }
        if (tolerance > 0.0) job.overrides.tolerance = tolerance;
        queue.push_back(job);
    }

    std::vector<int> codes(queue.size(), kPass);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < queue.size(); i = next++) codes[i] = run_job(queue[i]);
    };
    std::vector<std::thread> pool;
    const auto threads = std::min<std::size_t>(jobs, queue.size());
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return *std::max_element(codes.begin(), codes.end());
}
