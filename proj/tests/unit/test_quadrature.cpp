#include "doctest.h"

#include "ladderlab/errors.hpp"
#include "ladderlab/quadrature.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace ladderlab;

TEST_CASE("polynomials up to the rule degree are exact") {
    // G10/K21 integrates degree 31 exactly on each panel
    auto p = [](double x) { return 3 * std::pow(x, 9) - 2 * x * x + 1; };
    const double exact = 3.0 / 10 * (std::pow(2.0, 10) - 1) - 2.0 / 3 * (8 - 1) + 1;
    const auto r = integrate_relative(p, 1.0, 2.0, 1e-13);
    CHECK(r.converged);
    CHECK(r.evaluations == 21);
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-14));
    PanelPolicy g7;
    g7.rule_order = 15;
    CHECK(integrate_relative(p, 1.0, 2.0, 1e-13, g7).value == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("oscillatory integrand to tolerance") {
    auto f = [](double x) { return std::cos(50 * x) * std::exp(-x); };
    const double exact = (std::exp(-3.0) * (50 * std::sin(150.0) - std::cos(150.0)) + 1) / 2501;
    const auto r = integrate(f, 0.0, 3.0, 1e-12);
    CHECK(r.converged);
    CHECK(std::abs(r.value - exact) < 1e-11);
    CHECK(r.abs_error_est <= 1e-12);
}

TEST_CASE("relative tolerance on a large integral") {
    auto f = [](double x) { return 1e8 * x * x; };
    const auto r = integrate_relative(f, 0.0, 10.0, 1e-10);
    CHECK(r.value == doctest::Approx(1e11 / 3).epsilon(1e-13));
}

TEST_CASE("breakpoints absorb a kink") {
    auto f = [](double x) { return std::abs(x - 0.3); };
    const std::vector<double> bp{0.0, 0.3, 1.0};
    const auto r = integrate_pieces_relative(f, bp, 1e-12);
    CHECK(r.value == doctest::Approx(0.045 + 0.245).epsilon(1e-14));
}

TEST_CASE("empty interval") {
    const auto r = integrate([](double) { return 1.0; }, 2.0, 2.0, 1e-9);
    CHECK(r.value == 0.0);
    CHECK(r.converged);
}

TEST_CASE("non-finite integrand is a domain error") {
    auto f = [](double x) { return x > 0.5 ? std::numeric_limits<double>::quiet_NaN() : x; };
    CHECK_THROWS_AS(integrate(f, 0.0, 1.0, 1e-9), DomainError);
}

TEST_CASE("argument validation") {
    auto f = [](double x) { return x; };
    CHECK_THROWS_AS(integrate(f, 1.0, 0.0, 1e-9), DomainError);
    CHECK_THROWS_AS(integrate(f, 0.0, 1.0, 0.0), DomainError);
    PanelPolicy bad;
    bad.rule_order = 17;
    CHECK_THROWS_AS(integrate(f, 0.0, 1.0, 1e-9, bad), DomainError);
}

TEST_CASE("a singular integrand reports non-convergence") {
    PanelPolicy shallow;
    shallow.max_depth = 3;
    const auto r = integrate([](double x) { return 1.0 / std::sqrt(x + 1e-300); }, 0.0, 1.0, 1e-14, shallow);
    CHECK_FALSE(r.converged);
}

TEST_CASE("cumulative integrals are running sums of cells") {
    auto f = [](double x) { return std::sin(x) + 2; };
    const std::vector<double> grid{0.0, 0.5, 1.7, 3.0, 10.0};
    const auto cum = integrate_cumulative(f, 0.0, grid, 1e-13);
    REQUIRE(cum.size() == grid.size());
    CHECK(cum[0].value == 0.0);
    double running = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        running += integrate(f, grid[i - 1], grid[i], 1e-13).value;
        CHECK(cum[i].value == running);
        CHECK(cum[i].value == doctest::Approx(1 - std::cos(grid[i]) + 2 * grid[i]).epsilon(1e-13));
    }
    const std::vector<double> descending{1.0, 0.5};
    CHECK_THROWS_AS(integrate_cumulative(f, 0.0, descending, 1e-9), DomainError);
}

TEST_CASE("pairwise summation") {
    std::vector<double> v(1000001, 0.1);
    v[0] = 1e16;
    // the small terms survive only because they are grouped before meeting 1e16
    const double s = pairwise_sum(v);
    CHECK(s == doctest::Approx(1e16 + 1e5).epsilon(1e-15));
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("panel sizing follows the mean zero spacing") {
    CHECK(zero_spacing(1e4) == doctest::Approx(2 * M_PI / std::log(1e4 / (2 * M_PI))));
    const PanelPolicy p;
    CHECK(panel_width_cap(1e4, p) == doctest::Approx(zero_spacing(1e4)));
    CHECK(panel_width_cap(1e2, p) <= 1.0);
}
