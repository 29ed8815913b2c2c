#include "fracspec/besov.hpp"
#include "fracspec/error.hpp"
#include "fracspec/psido.hpp"

#include <cmath>

#include <doctest.h>

using namespace fracspec;

namespace {

double max_diff(const GridFunction& a, const GridFunction& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
    return d;
}

Symbol sin_xi_squared() {
    Symbol s;
    s.name = "sin_xi_squared";
    s.evaluate = [](const Eigen::VectorXd&, const Eigen::VectorXd& xi) { return std::complex<double>(std::sin(xi.squaredNorm())); };
    s.x_independent = true;
    return s;
}

} // namespace

TEST_SUITE("psido_engine") {

TEST_CASE("identity symbol validates with unit constant") {
    const auto v = validate_symbol(identity_symbol(), {}, 2);
    CHECK(v.pass);
    REQUIRE(v.find({0}, {0}) != nullptr);
    CHECK(v.find({0}, {0})->c_hat == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& b : v.bounds)
        if (b.alpha != std::vector<int>{0} || b.gamma != std::vector<int>{0}) CHECK(b.c_hat <= 1e-12);
}

TEST_CASE("Bessel power symbol of order -0.9") {
    const auto v = validate_symbol(bessel_power_symbol(-0.9), {}, 2);
    CHECK(v.pass);
    // sup over xi of (1+|xi|^2)^{-0.45} (1+|xi|)^{0.9}, attained at |xi| = 1.
    CHECK(v.find({0}, {0})->c_hat == doctest::Approx(std::pow(2.0, 0.45)).epsilon(1e-9));
}

TEST_CASE("sin |xi|^2 is not of order 0") {
    const auto v = validate_symbol(sin_xi_squared(), {}, 1);
    CHECK_FALSE(v.pass);
    const auto* b = v.find({0}, {1});
    REQUIRE(b != nullptr);
    CHECK_FALSE(b->stable);
    CHECK_FALSE(v.reason.empty());
}

TEST_CASE("exotic symbol is admitted with delta = 1 only") {
    auto sym = exotic_demo_symbol();
    CHECK(sym.type_delta == 1.0);
    const auto v = validate_symbol(sym, {}, 1);
    CHECK(v.pass);
    CHECK(v.type_delta == 1.0);
    CHECK(v.bounds.size() == 4);

    sym.type_delta = 0.0;
    const auto strict = validate_symbol(sym, {}, 1);
    CHECK_FALSE(strict.pass);
    CHECK(strict.find({1}, {0})->c_hat_refined > 1.5 * strict.find({1}, {0})->c_hat);
}

TEST_CASE("two-dimensional probes") {
    ProbeSpec probes;
    probes.dim = 2;
    probes.xi_cutoff = 200.0;
    probes.xi_per_decade = 16;
    const auto v = validate_symbol(separable_demo_symbol(-0.5, 0.5), probes, 1);
    CHECK(v.pass);
    CHECK(v.bounds.size() == 9);
}

TEST_CASE("catalog") {
    CHECK(symbol_from_catalog("bessel_power", {{"sigma", -0.8}}).order == -0.8);
    CHECK(symbol_from_catalog("separable_demo", {{"sigma", -0.8}}).params["amplitude"] == 0.5);
    CHECK_THROWS_AS(symbol_from_catalog("nope", nlohmann::json::object()), Error);
    CHECK_THROWS_AS(symbol_from_catalog("bessel_power", {{"sigma", -0.8}, {"typo", 1}}), Error);
    CHECK_THROWS_AS(symbol_from_catalog("separable_demo", {{"sigma", -0.8}, {"amplitude", 1.0}}), Error);
    try {
        symbol_from_catalog("bessel_power", nlohmann::json::object());
    } catch (const Error& e) {
        CHECK(e.is_config_error());
    }
}

TEST_CASE("apply: identity, multiplier and separable paths") {
    const Grid g(1, 1024, 64.0);
    const auto f = random_band_limited(g, 8.0, 21);
    CHECK(max_diff(apply_psido(identity_symbol(), f, 12.0), f) <= 1e-12);
    CHECK(max_diff(apply_psido(bessel_power_symbol(0.7), f, 12.0), lift(f, 0.7)) <= 1e-10);

    const auto sep = apply_psido(separable_demo_symbol(-0.6, 0.5), f, 12.0);
    auto expect = lift(f, -0.6);
    for (std::size_t i = 0; i < g.size(); ++i) expect.values[i] *= 1.0 + 0.5 * std::cos(g.x(i)[0]);
    CHECK(max_diff(sep, expect) <= 1e-10);

    // The direct path, with terms removed, agrees with the separable path.
    Symbol direct = separable_demo_symbol(-0.6, 0.5);
    direct.terms.clear();
    CHECK(max_diff(apply_psido(direct, f, 12.0), expect) <= 1e-10);
}

TEST_CASE("apply: cutoff too small") {
    const Grid g(1, 512, 40.0);
    const auto f = random_band_limited(g, 8.0, 2);
    try {
        apply_psido(identity_symbol(), f, 1.0);
        FAIL("expected cutoff error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::cutoff_too_small);
    }
}

TEST_CASE("apply: linearity and translation") {
    const Grid g(1, 256, 32.0);
    const auto f = random_band_limited(g, 6.0, 8), h = random_band_limited(g, 6.0, 9);
    const auto sym = separable_demo_symbol(-0.4, 0.3);
    GridFunction comb(g);
    const std::complex<double> a(2.0, -1.0), b(-0.5, 0.25);
    for (std::size_t i = 0; i < g.size(); ++i) comb.values[i] = a * f.values[i] + b * h.values[i];
    const auto tf = apply_psido(sym, f, 10.0), th = apply_psido(sym, h, 10.0), tc = apply_psido(sym, comb, 10.0);
    double d = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) d = std::max(d, std::abs(tc.values[i] - a * tf.values[i] - b * th.values[i]));
    CHECK(d <= 1e-10);

    const auto mult = bessel_power_symbol(-1.0);
    GridFunction shifted(g);
    const std::size_t shift = 17;
    for (std::size_t i = 0; i < g.size(); ++i) shifted.values[(i + shift) % g.size()] = f.values[i];
    const auto a1 = apply_psido(mult, shifted, 10.0), a2 = apply_psido(mult, f, 10.0);
    double t = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) t = std::max(t, std::abs(a1.values[(i + shift) % g.size()] - a2.values[i]));
    CHECK(t <= 1e-12);
}

TEST_CASE("lifted symbol") {
    const auto lifted = compose_lifted_symbol(bessel_power_symbol(-0.9));
    CHECK(lifted.order == 0.0);
    Eigen::VectorXd x(1), xi(1);
    x << 0.3;
    for (double v : {0.0, 0.5, 3.0, 100.0, 5e4}) {
        xi << v;
        CHECK(std::abs(lifted(x, xi) - 1.0) <= 1e-12);
    }
    const auto sym = separable_demo_symbol(-0.8, 0.5);
    const auto ls = compose_lifted_symbol(sym);
    for (double v : {0.0, 2.0, 77.0}) {
        xi << v;
        CHECK(std::abs(ls(x, xi) * bessel_weight(-0.8, xi) - sym(x, xi)) <= 1e-12);
    }
    CHECK(validate_symbol(sym, {}, 2).pass);
    CHECK(validate_symbol(ls, {}, 2).pass);
    CHECK_THROWS_AS(compose_lifted_symbol(identity_symbol()), Error);
}

TEST_CASE("boundedness probe") {
    const Grid g(1, 256, 32.0);
    std::vector<GridFunction> corpus;
    for (unsigned long long seed = 1; seed <= 20; ++seed) corpus.push_back(random_band_limited(g, 6.0, seed));

    const auto id = boundedness_probe(identity_symbol(), {0.45, 2.0, 2.0}, corpus);
    CHECK(id.pass);
    CHECK(id.max_ratio == doctest::Approx(1.0).epsilon(1e-10));

    const auto lifted = compose_lifted_symbol(separable_demo_symbol(-0.9, 0.5));
    const auto rep = boundedness_probe(lifted, {0.45, 2.0, 2.0}, corpus);
    CHECK(rep.pass);
    CHECK(std::isfinite(rep.max_ratio));
    CHECK(rep.max_ratio >= 1.0);
    CHECK(rep.max_ratio <= 1.6);

    const auto none = boundedness_probe(identity_symbol(), {0.45, 2.0, 2.0}, {GridFunction(g)});
    CHECK(none.skipped == 1);
    CHECK(none.evaluated == 0);
}

}
