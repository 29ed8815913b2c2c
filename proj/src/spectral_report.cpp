#include "fracspec/spectral_report.hpp"

#include "fracspec/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace fracspec {

namespace {

// Symmetric eigensolve with vectors; verifies residuals of the leading pairs.
std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& k, const nlohmann::json& provenance) {
    const auto n = static_cast<lapack_int>(k.rows());
    if (n == 0) return {};
    Eigen::MatrixXd v = k;
    std::vector<double> w(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, v.data(), n, w.data());
    if (info != 0)
        fail(Errc::convergence, "dsyevd failed with info " + std::to_string(info) + "; assembly " + provenance.dump());
    double norm = 0.0;
    for (double x : w) norm = std::max(norm, std::abs(x));
    // Leading pairs by modulus.
    std::vector<lapack_int> order(static_cast<std::size_t>(n));
    for (lapack_int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](lapack_int a, lapack_int b) {
        return std::abs(w[static_cast<std::size_t>(a)]) > std::abs(w[static_cast<std::size_t>(b)]);
    });
    const lapack_int top = std::min<lapack_int>(50, n);
    for (lapack_int t = 0; t < top; ++t) {
        const lapack_int i = order[static_cast<std::size_t>(t)];
        const double res = (k * v.col(i) - w[static_cast<std::size_t>(i)] * v.col(i)).norm();
        if (res > 1e-8 * std::max(norm, 1e-300))
            fail(Errc::convergence, "eigenpair residual " + std::to_string(res) + " exceeds 1e-8 |K|; assembly " +
                                        provenance.dump());
    }
    return w;
}

std::vector<std::complex<double>> hermitian_eigenvalues(const Eigen::MatrixXcd& k, const nlohmann::json& provenance) {
    const auto n = static_cast<lapack_int>(k.rows());
    Eigen::MatrixXcd v = k;
    std::vector<double> w(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, v.data(), n, w.data());
    if (info != 0)
        fail(Errc::convergence, "zheevd failed with info " + std::to_string(info) + "; assembly " + provenance.dump());
    return {w.begin(), w.end()};
}

std::vector<std::complex<double>> general_eigenvalues(const Eigen::MatrixXcd& k, const nlohmann::json& provenance) {
    const auto n = static_cast<lapack_int>(k.rows());
    Eigen::MatrixXcd a = k;
    std::vector<std::complex<double>> w(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(), nullptr, 1, nullptr, 1);
    if (info != 0)
        fail(Errc::convergence, "zgeev failed with info " + std::to_string(info) + "; assembly " + provenance.dump());
    return w;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

std::vector<std::complex<double>> eigen_spectrum(const DiscretizedOperator& op) {
    require(op.matrix.rows() == op.matrix.cols(), Errc::shape_mismatch, "eigen_spectrum needs a square matrix");
    std::vector<std::complex<double>> out;
    if (op.hermitian_similar) {
        const auto w = symmetric_eigenvalues(*op.hermitian_similar, op.assembly);
        out.assign(w.begin(), w.end());
    } else if (op.symmetric && op.matrix.imag().cwiseAbs().maxCoeff() == 0.0) {
        const auto w = symmetric_eigenvalues(op.matrix.real(), op.assembly);
        out.assign(w.begin(), w.end());
    } else if (op.symmetric) {
        out = hermitian_eigenvalues(op.matrix, op.assembly);
    } else {
        out = general_eigenvalues(op.matrix, op.assembly);
    }
    std::sort(out.begin(), out.end(), [](const std::complex<double>& a, const std::complex<double>& b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb) return ma > mb;
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return out;
}

std::vector<double> nonzero_moduli(const std::vector<std::complex<double>>& spectrum) {
    std::vector<double> out(spectrum.size());
    if (spectrum.empty()) return out;
    const double floor = 1e-12 * std::abs(spectrum.front());
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double m = std::abs(spectrum[k]);
        out[k] = m < floor ? 0.0 : m;
    }
    return out;
}

double theoretical_exponent(int n, double d, double s, double p) {
    check_window(s * p, n - d, n, "decay window n-d < sp <= n");
    return -1.0 + (n - s * p) / d;
}

double trace_exponent(int n, double d, double s, double p) {
    check_window(s, (n - d) / p, n / p, "trace window (n-d)/p < s <= n/p");
    return -1.0 / p + (n / p - s) / d;
}

nlohmann::json FitRecord::to_json() const {
    return {{"window", {k_lo, k_hi}}, {"slope", slope}, {"intercept", intercept}, {"residual", residual}, {"method", method}};
}

namespace {

struct Window {
    std::size_t lo, hi;
};

Window resolve_window(const std::vector<double>& moduli, const WindowPolicy& policy) {
    std::size_t nonzero = 0;
    for (double m : moduli)
        if (m > 0.0) ++nonzero;
    if (nonzero < 30)
        fail(Errc::insufficient_spectrum, "only " + std::to_string(nonzero) + " nonzero eigenvalues; at least 30 needed");
    std::size_t hi = policy.k_hi;
    if (hi == 0) hi = std::min<std::size_t>(moduli.size() / 5, 400);
    hi = std::min(hi, nonzero);
    const std::size_t lo = std::max<std::size_t>(policy.k_lo, 1);
    if (hi < lo + 2)
        fail(Errc::insufficient_spectrum, "fit window [" + std::to_string(lo) + ", " + std::to_string(hi) + "] is too short");
    return {lo, hi};
}

} // namespace

FitRecord fit_decay_exponent(const std::vector<double>& moduli, const WindowPolicy& policy) {
    const auto w = resolve_window(moduli, policy);
    const double count = static_cast<double>(w.hi - w.lo + 1);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = w.lo; k <= w.hi; ++k) {
        const double x = std::log(static_cast<double>(k)), y = std::log(moduli[k - 1]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    FitRecord fit;
    fit.k_lo = w.lo;
    fit.k_hi = w.hi;
    fit.slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / count;
    double rss = 0.0;
    for (std::size_t k = w.lo; k <= w.hi; ++k) {
        const double r = std::log(moduli[k - 1]) - fit.intercept - fit.slope * std::log(static_cast<double>(k));
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / count);
    return fit;
}

FitRecord fit_upper_envelope(const std::vector<double>& moduli, const WindowPolicy& policy, double quantile) {
    require(quantile > 0.0 && quantile < 1.0, Errc::precondition, "quantile must lie in (0,1)");
    const auto w = resolve_window(moduli, policy);
    std::vector<double> xs, ys;
    for (std::size_t k = w.lo; k <= w.hi; ++k) {
        xs.push_back(std::log(static_cast<double>(k)));
        ys.push_back(std::log(moduli[k - 1]));
    }
    const std::size_t count = xs.size();
    const auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(count))) - 1;
    auto profile = [&](double b, double& a) {
        std::vector<double> r(count);
        for (std::size_t i = 0; i < count; ++i) r[i] = ys[i] - b * xs[i];
        std::vector<double> sorted = r;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank), sorted.end());
        a = sorted[rank];
        double loss = 0.0;
        for (double v : r) {
            const double u = v - a;
            loss += u >= 0.0 ? quantile * u : (quantile - 1.0) * u;
        }
        return loss;
    };
    double lo = -6.0, hi = 2.0, a = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (profile(m1, a) <= profile(m2, a)) hi = m2;
        else lo = m1;
    }
    FitRecord fit;
    fit.k_lo = w.lo;
    fit.k_hi = w.hi;
    fit.slope = 0.5 * (lo + hi);
    fit.residual = profile(fit.slope, a) / static_cast<double>(count);
    fit.intercept = a;
    fit.method = "quantile-" + fmt(quantile);
    return fit;
}

nlohmann::json SpectrumReport::to_json() const {
    std::vector<double> head;
    for (std::size_t k = 0; k < std::min<std::size_t>(10, eigenvalues.size()); ++k) head.push_back(std::abs(eigenvalues[k]));
    return {{"eigenvalue_count", eigenvalues.size()},
            {"leading_moduli", head},
            {"fit", fit.to_json()},
            {"theoretical_exponent", theoretical_exponent},
            {"tolerance", tolerance},
            {"mode", mode == VerdictMode::upper ? "upper" : "two_sided"},
            {"verdict", pass ? "PASS" : "FAIL"},
            {"provenance", provenance}};
}

SpectrumReport make_report(const DiscretizedOperator& op, double theoretical, double tolerance, VerdictMode mode,
                           const WindowPolicy& window) {
    SpectrumReport rep;
    rep.eigenvalues = eigen_spectrum(op);
    rep.theoretical_exponent = theoretical;
    rep.tolerance = tolerance;
    rep.mode = mode;
    rep.provenance = op.assembly;
    const auto moduli = nonzero_moduli(rep.eigenvalues);
    rep.fit = mode == VerdictMode::upper ? fit_upper_envelope(moduli, window) : fit_decay_exponent(moduli, window);
    rep.pass = mode == VerdictMode::upper ? rep.fit.slope <= theoretical + tolerance
                                          : std::abs(rep.fit.slope - theoretical) <= tolerance;
    return rep;
}

nlohmann::json SNumberCheck::to_json() const {
    return {{"fit", fit.to_json()}, {"expected_exponent", expected}, {"tolerance", tolerance},
            {"verdict", pass ? "PASS" : "FAIL"}, {"count", approximation_numbers.size()}};
}

SNumberCheck snumber_exponent_check(const FractalMeasure& measure, double s, double p, const FrequencyGrid& freq,
                                    double tolerance, const WindowPolicy& window) {
    require(p == 2.0, Errc::precondition, "exact s-numbers need p = 2");
    SNumberCheck out;
    out.expected = trace_exponent(measure.ambient_dim(), measure.dimension(), s, p);
    out.tolerance = tolerance;
    const auto gram = trace_gram(measure, s, p, freq);
    const auto spec = eigen_spectrum(gram);
    for (const auto& l : spec) out.approximation_numbers.push_back(std::sqrt(std::max(l.real(), 0.0)));
    out.fit = fit_decay_exponent(nonzero_moduli(std::vector<std::complex<double>>(out.approximation_numbers.begin(),
                                                                                  out.approximation_numbers.end())),
                                 window);
    out.pass = std::abs(out.fit.slope - out.expected) <= tolerance;
    return out;
}

} // namespace fracspec
