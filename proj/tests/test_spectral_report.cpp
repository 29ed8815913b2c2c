#include "helpers.hpp"

#include "fracspec/error.hpp"
#include "fracspec/spectral_report.hpp"

#include <random>

#include <doctest.h>

using namespace fracspec;
using testing::cantor;
using testing::kCantorDim;

namespace {

DiscretizedOperator from(const Eigen::MatrixXcd& m) {
    DiscretizedOperator op;
    op.matrix = m;
    op.update_symmetric_flag();
    return op;
}

std::vector<double> power_law(double exponent, std::size_t count, double c = 1.0) {
    std::vector<double> out;
    for (std::size_t k = 1; k <= count; ++k) out.push_back(c * std::pow(static_cast<double>(k), exponent));
    return out;
}

} // namespace

TEST_SUITE("spectral_report") {

TEST_CASE("ordering") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 0.5;
    d(1, 1) = 1.0;
    const auto spec = eigen_spectrum(from(d));
    CHECK(spec[0].real() == doctest::Approx(1.0));
    CHECK(spec[1].real() == doctest::Approx(0.5));

    const auto zero = eigen_spectrum(from(Eigen::MatrixXcd::Zero(3, 3)));
    for (const auto& l : zero) CHECK(l == 0.0);
    for (double m : nonzero_moduli(zero)) CHECK(m == 0.0);

    // Ties in modulus: real part descending, then imaginary part descending.
    const std::complex<double> i(0.0, 1.0);
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(4, 4);
    t(0, 0) = -1.0;
    t(1, 1) = -i;
    t(2, 2) = 1.0;
    t(3, 3) = i;
    const auto tied = eigen_spectrum(from(t));
    const std::vector<std::complex<double>> expect{1.0, i, -i, -1.0};
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(tied[k] - expect[k]) <= 1e-12);
}

TEST_CASE("symmetric path residuals") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd a(60, 60);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = n01(rng);
    const Eigen::MatrixXd sym = a + a.transpose();
    const auto op = from(sym.cast<std::complex<double>>());
    REQUIRE(op.symmetric);
    const auto spec = eigen_spectrum(op);
    for (const auto& l : spec) CHECK(std::abs(l.imag()) == 0.0);
    for (std::size_t k = 1; k < spec.size(); ++k) CHECK(std::abs(spec[k]) <= std::abs(spec[k - 1]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    CHECK(std::abs(std::abs(spec[0]) - es.eigenvalues().cwiseAbs().maxCoeff()) <= 1e-10 * std::abs(spec[0]));
}

TEST_CASE("theoretical exponents") {
    CHECK(theoretical_exponent(1, kCantorDim, 0.45, 2.0) == doctest::Approx(-0.84150).epsilon(1e-4));
    CHECK(theoretical_exponent(1, kCantorDim, 0.5, 2.0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(theoretical_exponent(1, kCantorDim, 0.8 / 1.5, 1.5) == doctest::Approx(-0.68301).epsilon(1e-4));
    CHECK(trace_exponent(1, kCantorDim, 0.45, 2.0) == doctest::Approx(-0.42075).epsilon(1e-4));
    CHECK(trace_exponent(1, kCantorDim, 0.5, 2.0) == doctest::Approx(-0.5).epsilon(1e-14));
    try {
        theoretical_exponent(1, kCantorDim, 0.6, 2.0);
        FAIL("expected window error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::window_violation);
    }
    CHECK_THROWS_AS(theoretical_exponent(1, kCantorDim, 0.1, 2.0), Error);
}

TEST_CASE("least-squares fit") {
    const auto exact = fit_decay_exponent(power_law(-0.8415, 1000));
    CHECK(exact.slope == doctest::Approx(-0.8415).epsilon(1e-6));
    CHECK(exact.k_lo == 10);
    CHECK(exact.k_hi == 200);
    CHECK(exact.residual <= 1e-10);

    auto wobble = power_law(-0.8415, 1000, 3.0);
    for (std::size_t k = 1; k <= wobble.size(); ++k) wobble[k - 1] *= 1.0 + 0.05 * (k % 2 ? -1.0 : 1.0);
    CHECK(std::abs(fit_decay_exponent(wobble).slope + 0.8415) <= 0.01);

    // Fits use moduli; signs do not matter.
    std::vector<std::complex<double>> signed_spec;
    for (std::size_t k = 0; k < 500; ++k) signed_spec.emplace_back((k % 2 ? -1.0 : 1.0) * std::pow(k + 1.0, -0.6));
    auto ordered = signed_spec;
    CHECK(fit_decay_exponent(nonzero_moduli(ordered)).slope == doctest::Approx(fit_decay_exponent(power_law(-0.6, 500)).slope));
}

TEST_CASE("insufficient spectrum") {
    try {
        fit_decay_exponent(power_law(-1.0, 29));
        FAIL("expected insufficient spectrum");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::insufficient_spectrum);
    }
    CHECK_THROWS_AS(fit_decay_exponent(power_law(-1.0, 40), {10, 11}), Error);
}

TEST_CASE("scale invariance") {
    Eigen::VectorXd d(300);
    for (Eigen::Index k = 0; k < d.size(); ++k) d[k] = std::pow(static_cast<double>(k + 1), -0.7);
    const Eigen::MatrixXcd m = d.cast<std::complex<double>>().asDiagonal();
    const auto r1 = make_report(from(m), -0.7, 0.08, VerdictMode::two_sided, {10, 60});
    const auto r2 = make_report(from(4.0 * m), -0.7, 0.08, VerdictMode::two_sided, {10, 60});
    CHECK(r1.pass);
    CHECK(r1.fit.slope == doctest::Approx(r2.fit.slope).epsilon(1e-12));
    CHECK(r2.fit.intercept - r1.fit.intercept == doctest::Approx(std::log(4.0)).epsilon(1e-10));
    const auto far = make_report(from(m), -0.9, 0.08, VerdictMode::two_sided, {10, 60});
    CHECK_FALSE(far.pass);
    CHECK(far.to_json()["verdict"] == "FAIL");
}

TEST_CASE("upper envelope") {
    CHECK(fit_upper_envelope(power_law(-0.68, 1000)).slope == doctest::Approx(-0.68).epsilon(1e-6));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    auto noisy = power_law(-0.68, 1000);
    for (auto& v : noisy) v *= u(rng);
    std::sort(noisy.rbegin(), noisy.rend());
    const auto env = fit_upper_envelope(noisy);
    const auto ls = fit_decay_exponent(noisy);
    CHECK(env.intercept > ls.intercept);
    CHECK(std::abs(env.slope + 0.68) <= 0.1);

    // Upper mode passes anything decaying faster than the bound.
    Eigen::VectorXd d(300);
    for (Eigen::Index k = 0; k < d.size(); ++k) d[k] = std::pow(static_cast<double>(k + 1), -1.2);
    const auto fast = make_report(from(d.cast<std::complex<double>>().asDiagonal()), -0.68, 0.08, VerdictMode::upper, {10, 60});
    CHECK(fast.pass);
}

TEST_CASE("trace s-numbers at a small level") {
    const auto mu = quadrature(cantor(), 7);
    const auto check = snumber_exponent_check(mu, 0.45, 2.0, {2000.0, 0.0}, 0.05, {10, 25});
    CHECK(check.expected == doctest::Approx(-0.42075).epsilon(1e-4));
    for (std::size_t k = 1; k < check.approximation_numbers.size(); ++k)
        CHECK(check.approximation_numbers[k] <= check.approximation_numbers[k - 1]);
    CHECK(check.fit.slope < 0.0);
    CHECK_THROWS_AS(snumber_exponent_check(mu, 0.6, 1.5, {2000.0, 0.0}), Error);
}

}
