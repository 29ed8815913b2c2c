#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracspec {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Errc {
    precondition,
    shape_mismatch,
    overlap_detected,
    dimension_out_of_range,
    budget_exceeded,
    resolution,
    band_overflow,
    cutoff_too_small,
    singularity,
    window_violation,
    insufficient_spectrum,
    dimension_too_large,
    convergence,
    config,
    io,
};

std::string_view to_string(Errc code);

// Every module error carries a code; the CLI maps codes to exit statuses.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

    // Configuration-class failures (bad input, violated parameter windows)
    // as opposed to numerical failures.
    bool is_config_error() const noexcept {
        return code_ == Errc::config || code_ == Errc::window_violation;
    }

private:
    Errc code_;
};

inline std::string_view to_string(Errc code) {
    switch (code) {
    case Errc::precondition: return "precondition";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::overlap_detected: return "overlap-detected";
    case Errc::dimension_out_of_range: return "dimension-out-of-range";
    case Errc::budget_exceeded: return "budget-exceeded";
    case Errc::resolution: return "resolution";
    case Errc::band_overflow: return "band-overflow";
    case Errc::cutoff_too_small: return "cutoff-too-small";
    case Errc::singularity: return "singularity";
    case Errc::window_violation: return "window-violation";
    case Errc::insufficient_spectrum: return "insufficient-spectrum";
    case Errc::dimension_too_large: return "dimension-too-large";
    case Errc::convergence: return "convergence";
    case Errc::config: return "config";
    case Errc::io: return "io";
    }
    return "unknown";
}

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
    if (!cond) fail(code, what);
}

} // namespace fracspec
