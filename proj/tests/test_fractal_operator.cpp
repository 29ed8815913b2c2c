#include "helpers.hpp"

#include "fracspec/bessel_kernel.hpp"
#include "fracspec/error.hpp"
#include "fracspec/fractal_operator.hpp"
#include "fracspec/io.hpp"
#include "fracspec/spectral_report.hpp"

#include <filesystem>
#include <numbers>

#include <doctest.h>

using namespace fracspec;
using testing::cantor;
using testing::point;

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

Errc code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return Errc::precondition;
}

Symbol scaled(Symbol s, double c) {
    auto eval = s.evaluate;
    s.evaluate = [eval, c](const Eigen::VectorXd& x, const Eigen::VectorXd& xi) { return c * eval(x, xi); };
    for (auto& t : s.terms) {
        auto b = t.b;
        t.b = [b, c](const Eigen::VectorXd& xi) { return c * b(xi); };
    }
    return s;
}

std::vector<double> moduli(const DiscretizedOperator& op) { return nonzero_moduli(eigen_spectrum(op)); }

} // namespace

TEST_SUITE("fractal_operator") {

TEST_CASE("Bessel kernel closed form at a = 2, n = 1") {
    for (double rho = 0.0; rho <= 10.0; rho += 0.125)
        CHECK(std::abs(bessel_kernel(2.0, 1, rho) - std::sqrt(std::numbers::pi / 2.0) * std::exp(-rho)) <= 1e-8);
    CHECK(bessel_kernel(2.0, 1, 1.0) == doctest::Approx(0.461069).epsilon(1e-6));
}

TEST_CASE("Bessel kernel singular law and table") {
    const double a = 0.9;
    const double slope = std::log(bessel_kernel(a, 1, 1e-8) / bessel_kernel(a, 1, 1e-6)) / std::log(1e-2);
    CHECK(slope == doctest::Approx(-0.1).epsilon(0.2));
    CHECK(code_of([] { bessel_kernel(0.9, 1, 0.0); }) == Errc::singularity);
    CHECK(code_of([] { bessel_kernel(1.0, 1, 1e-13); }) == Errc::singularity);
    CHECK(bessel_kernel(3.0, 1, 0.0) > 0.0);

    const BesselKernel table(a, 1);
    CHECK(table.singular());
    double prev = INFINITY;
    for (double rho = 1e-9; rho < 60.0; rho *= 1.37) {
        const double exact = bessel_kernel(a, 1, rho);
        CHECK(std::abs(table(rho) - exact) <= 1e-8 * exact);
        CHECK(exact < prev);
        prev = exact;
    }
    // Local model c rho^{a-n} + c2 at small radius.
    const double rho = 1e-7;
    CHECK(table.local_coefficient() * std::pow(rho, a - 1.0) + table.regular_part() == doctest::Approx(table(rho)).epsilon(1e-9));

    const BesselKernel log_case(1.0, 1);
    CHECK(log_case.logarithmic());
    const double r1 = 1e-6, r2 = 1e-8;
    CHECK((log_case(r2) - log_case(r1)) / std::log(r1 / r2) == doctest::Approx(log_case.local_coefficient()).epsilon(1e-3));
}

TEST_CASE("Fourier transform of f mu") {
    const auto mu = quadrature(cantor(), 4);
    std::vector<std::complex<double>> ones(mu.size(), 1.0), zeros(mu.size(), 0.0);
    const std::vector<Eigen::VectorXd> xi{point(0.0), point(3.0), point(-40.0)};
    const auto f1 = fourier_of_fmu(ones, mu, xi);
    CHECK(std::abs(f1[0] - kInvSqrt2Pi) <= 1e-15);
    CHECK(std::abs(f1[1]) < kInvSqrt2Pi);
    for (auto v : fourier_of_fmu(zeros, mu, xi)) CHECK(v == 0.0);

    const auto single = quadrature(cantor(), 0);
    std::vector<std::complex<double>> one(1, 1.0);
    Eigen::VectorXd shift = single.atom(0);
    for (auto v : fourier_of_fmu(one, single, xi)) CHECK(std::abs(v) == doctest::Approx(kInvSqrt2Pi).epsilon(1e-15));
}

TEST_CASE("atom lattice") {
    const auto lat = detect_lattice(quadrature(cantor(), 5));
    REQUIRE(lat.has_value());
    CHECK(lat->delta == doctest::Approx(2.0 * std::pow(3.0, -5)).epsilon(1e-9));
    CHECK(lat->index.front() == 0);
}

TEST_CASE("Nystrom matrix: single atom and two atoms") {
    const double s = 0.45;
    const auto one = assemble_dmu_kernel(quadrature(cantor(), 0), s);
    CHECK(one.matrix.rows() == 1);
    CHECK(one.matrix(0, 0).real() > 0.0);

    const auto mu = quadrature(cantor(), 1);
    const auto two = assemble_dmu_kernel(mu, s);
    REQUIRE(two.symmetric);
    const double diag = two.matrix(0, 0).real();
    const double off = 0.5 * kInvSqrt2Pi * bessel_kernel(2.0 * s, 1, 2.0 / 3.0);
    CHECK(two.matrix(0, 1).real() == doctest::Approx(off).epsilon(1e-12));
    const auto spec = eigen_spectrum(two);
    CHECK(spec[0].real() == doctest::Approx(diag + off).epsilon(1e-12));
    CHECK(spec[1].real() == doctest::Approx(diag - off).epsilon(1e-12));
    CHECK(spec[1].real() > 0.0);
}

TEST_CASE("Nystrom matrix: symmetry, semidefiniteness, level convergence") {
    const double s = 0.45;
    const auto op9 = assemble_dmu_kernel(quadrature(cantor(), 9), s);
    CHECK(op9.symmetric);
    CHECK((op9.matrix - op9.matrix.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    const auto spec9 = eigen_spectrum(op9);
    CHECK(spec9.back().real() >= -1e-8 * spec9.front().real());

    const auto spec10 = eigen_spectrum(assemble_dmu_kernel(quadrature(cantor(), 10), s));
    for (std::size_t k = 0; k < 20; ++k) CHECK(std::abs(spec10[k].real() / spec9[k].real() - 1.0) <= 0.05);
}

TEST_CASE("parameter windows") {
    const auto mu = quadrature(cantor(), 3);
    CHECK(code_of([&] { assemble_dmu_kernel(mu, 0.15); }) == Errc::window_violation);
    CHECK(code_of([&] { assemble_dmu_kernel(mu, 0.6); }) == Errc::window_violation);
    CHECK(code_of([&] { trace_gram(mu, 0.1, 2.0, {}); }) == Errc::window_violation);
    CHECK(code_of([&] { assemble_tmu_galerkin(bessel_power_symbol(-0.5), 0.45, 2.0, mu, {}); }) == Errc::window_violation);
    CHECK(code_of([&] { assemble_tmu_galerkin(bessel_power_symbol(-1.2), 0.8, 1.5, mu, {}); }) == Errc::window_violation);
}

TEST_CASE("trace operator") {
    const auto mu = quadrature(cantor(), 4);
    const double s = 0.45;
    const auto gram = trace_gram(mu, s, 2.0, {80.0, 0.0});
    CHECK(gram.assembly["method"] == "lattice-fft");
    const double h = gram.assembly["xi_spacing"].get<double>();

    const auto t = assemble_trace_operator(mu, s, 2.0, {80.0, h});
    CHECK(t.assembly["xi_spacing"].get<double>() == h);
    const auto zero = static_cast<Eigen::Index>((t.matrix.cols() - 1) / 2);
    for (Eigen::Index j = 0; j < t.matrix.rows(); ++j)
        CHECK(std::abs(t.matrix(j, zero) - std::sqrt(mu.weights()[static_cast<std::size_t>(j)]) * kInvSqrt2Pi * std::sqrt(h)) <= 1e-15);

    // Same frequency lattice: the FFT Gram and T T* are the same Riemann sum.
    const Eigen::MatrixXcd direct = t.matrix * t.matrix.adjoint();
    CHECK((gram.matrix - direct).cwiseAbs().maxCoeff() <= 1e-10 * direct.cwiseAbs().maxCoeff());
}

TEST_CASE("trace Gram at p = 2 converges to the D^mu_s kernel") {
    // Level 8: 1.5 Xi must stay below pi / delta = 10306.
    const auto mu = quadrature(cantor(), 8);
    const double s = 0.45;
    const auto n = moduli(assemble_dmu_kernel(mu, s));
    auto gap = [&](double cutoff) {
        const auto a = moduli(trace_gram(mu, s, 2.0, {cutoff, 0.0}));
        double g = 0.0;
        for (std::size_t k = 0; k < 20; ++k) g = std::max(g, std::abs(a[k] / n[k] - 1.0));
        return g;
    };
    const double coarse = gap(3400.0), fine = gap(6800.0);
    CHECK(fine <= 0.05);
    CHECK(fine <= 0.6 * coarse);
}

TEST_CASE("Galerkin: single atom, linearity, hermitian similarity") {
    const auto one = quadrature(cantor(), 0);
    const auto g1 = assemble_tmu_galerkin(bessel_power_symbol(-0.9), 0.45, 2.0, one, {50.0, 0.0});
    CHECK(g1.matrix(0, 0).real() > 0.0);
    CHECK(std::abs(g1.matrix(0, 0).imag()) <= 1e-14);

    const auto mu = quadrature(cantor(), 6);
    const FrequencyGrid freq{700.0, 0.0};
    const auto base = assemble_tmu_galerkin(separable_demo_symbol(-0.8, 0.5), 0.8 / 1.5, 1.5, mu, freq);
    REQUIRE(base.hermitian_similar.has_value());
    const auto twice = assemble_tmu_galerkin(scaled(separable_demo_symbol(-0.8, 0.5), 2.5), 0.8 / 1.5, 1.5, mu, freq);
    const auto a = eigen_spectrum(base), b = eigen_spectrum(twice);
    for (std::size_t k = 0; k < 30; ++k) CHECK(std::abs(b[k] - 2.5 * a[k]) <= 1e-10 * std::abs(a[0]));

    // The similarity transform and the general solver agree.
    DiscretizedOperator plain = base;
    plain.hermitian_similar.reset();
    plain.symmetric = false;
    const auto c = eigen_spectrum(plain);
    for (std::size_t k = 0; k < 30; ++k) CHECK(std::abs(c[k] - a[k]) <= 1e-8 * std::abs(a[0]));
}

TEST_CASE("Galerkin: direct and lattice paths agree") {
    const auto mu = quadrature(cantor(), 4);
    const FrequencyGrid freq{80.0, 0.0};
    const auto sym = separable_demo_symbol(-0.8, 0.5);
    const auto fast = assemble_tmu_galerkin(sym, 0.8 / 1.5, 1.5, mu, freq);
    Symbol general = sym;
    general.terms.clear();
    const auto rows = assemble_tmu_galerkin(general, 0.8 / 1.5, 1.5, mu, freq);
    CHECK((fast.matrix - rows.matrix).cwiseAbs().maxCoeff() <= 1e-10 * fast.matrix.cwiseAbs().maxCoeff());
}

TEST_CASE("Galerkin: cutoff warning and cross-oracle with the Nystrom matrix") {
    const auto mu = quadrature(cantor(), 8);
    const double s = 0.45;
    const auto coarse = assemble_tmu_galerkin(bessel_power_symbol(-0.9), s, 2.0, mu, {50.0, 0.0});
    CHECK(coarse.assembly["warnings"].size() == 1);

    const auto g = moduli(assemble_tmu_galerkin(bessel_power_symbol(-0.9), s, 2.0, mu, {6800.0, 0.0}));
    const auto t = moduli(trace_gram(mu, s, 2.0, {6800.0, 0.0}));
    const auto n = moduli(assemble_dmu_kernel(mu, s));
    for (std::size_t k = 0; k < 20; ++k) {
        CHECK(std::abs(g[k] / n[k] - 1.0) <= 0.05);
        CHECK(std::abs(g[k] / t[k] - 1.0) <= 1e-9);
    }
}

TEST_CASE("operator dump round trip") {
    const auto op = assemble_dmu_kernel(quadrature(cantor(), 3), 0.45);
    const auto path = std::filesystem::temp_directory_path() / "fracspec_dump_test.bin";
    io::write_operator_dump(path, op, op.assembly);
    const auto back = io::read_operator_dump(path);
    std::filesystem::remove(path);
    CHECK(back.provenance == op.assembly);
    CHECK(back.matrix == op.matrix);
}

}
