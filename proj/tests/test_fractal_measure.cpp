#include "helpers.hpp"

#include "fracspec/error.hpp"
#include "fracspec/fractal_measure.hpp"

#include <random>
#include <sstream>

#include <doctest.h>

using namespace fracspec;
using testing::cantor;
using testing::kCantorDim;
using testing::point;

namespace {

Errc code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return Errc::precondition;
}

} // namespace

TEST_SUITE("fractal_measure") {

TEST_CASE("middle-third Cantor dimension") {
    const auto ifs = cantor();
    CHECK(ifs.dimension() == doctest::Approx(0.6309297535714574).epsilon(1e-12));
    CHECK(2.0 * std::pow(1.0 / 3.0, ifs.dimension()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("d = n is out of range") {
    CHECK(code_of([] { build_cantor_like(1, 2, 0.5, {point(0.0), point(0.5)}); }) == Errc::dimension_out_of_range);
}

TEST_CASE("four corners in the plane") {
    std::vector<Eigen::VectorXd> t(4, Eigen::VectorXd::Zero(2));
    t[1] << 0.75, 0.0;
    t[2] << 0.0, 0.75;
    t[3] << 0.75, 0.75;
    const auto ifs = build_cantor_like(2, 4, 0.25, t);
    CHECK(ifs.dimension() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("overlapping level-1 cells") {
    // Hull [0, 1]; the first two cells share (0.1, 0.3).
    CHECK(code_of([] { build_cantor_like(1, 3, 0.3, {point(0.0), point(0.1), point(0.7)}); }) == Errc::overlap_detected);
    CHECK_NOTHROW(build_cantor_like(1, 3, 0.3, {point(0.0), point(0.35), point(0.7)}));
}

TEST_CASE("quadrature level 1 and 2") {
    const auto mu1 = quadrature(cantor(), 1);
    REQUIRE(mu1.size() == 2);
    CHECK(mu1.atom(0)[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(mu1.atom(1)[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
    CHECK(mu1.weights()[0] == 0.5);
    CHECK(mu1.weights()[1] == 0.5);

    const auto mu2 = quadrature(cantor(), 2);
    REQUIRE(mu2.size() == 4);
    for (double w : mu2.weights()) CHECK(w == 0.25);
}

TEST_CASE("quadrature level 0 is the barycenter") {
    const auto mu = quadrature(cantor(), 0);
    REQUIRE(mu.size() == 1);
    CHECK(mu.atom(0)[0] == doctest::Approx(0.5));
}

TEST_CASE("normalization and first moment") {
    const auto ten = quadrature(cantor(), 10);
    CHECK(ten.size() == 1024);
    double total = 0.0;
    for (double w : ten.weights()) total += w;
    CHECK(std::abs(total - 1.0) <= 1e-14);

    for (int level = 1; level <= 8; ++level) {
        const auto mu = quadrature(cantor(), level);
        double mean = 0.0;
        for (std::size_t j = 0; j < mu.size(); ++j) mean += mu.weights()[j] * mu.atom(j)[0];
        CHECK(mean == doctest::Approx(0.5).epsilon(1e-13));
    }
}

TEST_CASE("atoms stay in the inflated hull") {
    const auto mu = quadrature(cantor(), 7);
    const double slack = mu.cell_diameter();
    for (std::size_t j = 0; j < mu.size(); ++j) {
        CHECK(mu.atom(j)[0] >= -slack);
        CHECK(mu.atom(j)[0] <= 1.0 + slack);
    }
}

TEST_CASE("lexicographic atom order") {
    const auto mu = quadrature(cantor(), 3);
    CHECK(mu.word(0) == "000");
    CHECK(mu.word(5) == "101");
    for (std::size_t j = 1; j < mu.size(); ++j) CHECK(mu.atom(j)[0] > mu.atom(j - 1)[0]);
}

TEST_CASE("atom budget") {
    try {
        quadrature(cantor(), 23);
        FAIL("expected budget error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::budget_exceeded);
        CHECK(std::string(e.what()).find("2^23") != std::string::npos);
    }
    CHECK(code_of([] { quadrature(cantor(), 5, 16); }) == Errc::budget_exceeded);
}

TEST_CASE("ball measure ratio") {
    const auto mu = quadrature(cantor(), 8);
    CHECK(ball_measure_ratio(mu, point(0.0), 1.0 / 3.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ball_measure_ratio(mu, point(0.0), 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ball_measure_ratio(mu, point(5.0), 0.5) == 0.0);
    const auto coarse = quadrature(cantor(), 1);
    CHECK(code_of([&] { ball_measure_ratio(coarse, point(0.0), 0.1); }) == Errc::resolution);
}

TEST_CASE("d-set regularity band") {
    const auto mu = quadrature(cantor(), 12);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> pick(0, mu.size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double lo = std::log(10.0 * mu.cell_diameter()), hi = std::log(1.0);
    double rmin = INFINITY, rmax = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double rho = std::exp(lo + (hi - lo) * u(rng));
        const double r = ball_measure_ratio(mu, mu.atom(pick(rng)), rho);
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    CHECK(rmin > 0.0);
    CHECK(rmax / rmin <= 8.0);
}

TEST_CASE("L_p norm on the attractor") {
    const auto mu = quadrature(cantor(), 1);
    const std::vector<std::complex<double>> ones(2, 1.0), zeros(2, 0.0), vals{1.0, 2.0};
    CHECK(lp_norm_on_gamma(ones, 1.7, mu) == doctest::Approx(1.0));
    CHECK(lp_norm_on_gamma(zeros, 2.0, mu) == 0.0);
    CHECK(lp_norm_on_gamma(vals, 2.0, mu) == doctest::Approx(std::sqrt(2.5)).epsilon(1e-14));
    CHECK(code_of([&] { lp_norm_on_gamma(std::vector<std::complex<double>>(3, 1.0), 2.0, mu); }) == Errc::shape_mismatch);
}

TEST_CASE("atoms CSV") {
    std::ostringstream out;
    write_atoms_csv(out, quadrature(cantor(), 1));
    std::istringstream in(out.str());
    std::string header, word;
    std::getline(in, header);
    CHECK(header == "word,x1,weight");
    const double expect[] = {1.0 / 6.0, 5.0 / 6.0};
    for (int j = 0; j < 2; ++j) {
        std::string line;
        std::getline(in, line);
        std::istringstream row(line);
        std::string x, w;
        std::getline(row, word, ',');
        std::getline(row, x, ',');
        std::getline(row, w);
        CHECK(word == std::to_string(j));
        CHECK(std::stod(x) == doctest::Approx(expect[j]).epsilon(1e-15));
        CHECK(w == "0.5");
    }
    std::string rest;
    CHECK_FALSE(std::getline(in, rest));
}

TEST_CASE("quadrature refuses unequal ratios") {
    Similitude a{0.2, Eigen::MatrixXd::Identity(1, 1), point(0.0)};
    Similitude b{0.3, Eigen::MatrixXd::Identity(1, 1), point(0.7)};
    const SimilitudeIFS ifs(1, {a, b});
    CHECK(std::pow(0.2, ifs.dimension()) + std::pow(0.3, ifs.dimension()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(code_of([&] { quadrature(ifs, 2); }) == Errc::precondition);
}

}
