#include "doctest.h"

#include "fixture.hpp"
#include "ladderlab/errors.hpp"
#include "ladderlab/functionals.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace ladderlab;

namespace {

const Functionals& fun() {
    static const Functionals f(fixture::table());
    return f;
}

IntervalSpec macro(double U) { return {1000.0, U, Regime::macroscopic, 0.01, 2.0}; }

}  // namespace

TEST_CASE("regime ranges") {
    const IntervalSpec s{1e4, 0.0, Regime::macroscopic, 0.01, 2.0};
    const auto [lo, hi] = s.range();
    CHECK(lo == doctest::Approx(std::pow(1e4, 1.0 / 3 + 0.02)));
    CHECK(hi == doctest::Approx(1e4 / std::pow(std::log(1e4), 2)));
    CHECK(IntervalSpec::at_upper(1e4, Regime::short_range).U == doctest::Approx(1e4 / std::log(1e4)));
    CHECK(regime_from_name(regime_name(Regime::half_plus)) == Regime::half_plus);
    CHECK_THROWS_AS(regime_from_name("long"), DomainError);
}

TEST_CASE("out-of-regime widths are refused with the admissible range") {
    CHECK_THROWS_WITH_AS(fun().theorem2_lhs(macro(50.0), 0, 0), doctest::Contains("U ∈ [T^{1/3+2ε}, T/ln²T]"),
                         RegimeError);
    CHECK_THROWS_WITH_AS(fun().theorem2_lhs(macro(5.0), 0, 0), doctest::Contains("outside regime"), RegimeError);
    // T^{1/2+eps} exceeds T/ln^2 T at T = 1000
    const IntervalSpec half{1000.0, 20.0, Regime::half_plus, 0.01, 2.0};
    CHECK_THROWS_WITH_AS(fun().arg_moment(half, 0, 1), doctest::Contains("regime empty"), RegimeError);
    const IntervalSpec seven{1000.0, 400.0, Regime::seven_eighths, 0.01, 2.0};
    CHECK_THROWS_WITH_AS(fun().fourth_power_energy(seven, 0), doctest::Contains("U = T^{7/8+ε}"), RegimeError);
}

TEST_CASE("zero width gives zero") {
    CHECK(fun().product_energy(macro(0.0), 2).value == 0.0);
    CHECK(fun().theorem2_lhs(macro(0.0), 1, 1).value == 0.0);
    CHECK(fun().corollary_lhs(macro(0.0), 0, 0, 1).value == 0.0);
    CHECK(fun().ramachandra_lhs({1000.0, 0.0, Regime::short_range, 0.01, 2.0}, 0).value == 0.0);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(fun().product_energy(macro(20.0), 4), DomainError);
    CHECK_THROWS_AS(fun().arg_moment(macro(20.0), 0, 4), DomainError);
    CHECK_THROWS_AS(fun().ramachandra_lhs({1000.0, 144.0, Regime::short_range, 0.01, 2.0}, 5), DomainError);
    CHECK_THROWS_WITH_AS(fun().product_energy({800.0, 20.0, Regime::macroscopic, 0.01, 2.0}, 3),
                         doctest::Contains("iterate depth"), DomainError);
}

TEST_CASE("n = 0 product energy is the energy increment") {
    const double T = 1000.0, U = 20.0;
    const double direct = table_energy(fixture::table(), T + U) - table_energy(fixture::table(), T);
    CHECK(fun().product_energy(macro(U), 0).value == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("integrands factor through the ladder") {
    const auto& tab = fixture::table();
    for (double t : {1003.7, 1111.1, 1250.0}) {
        CAPTURE(t);
        const double y = eval_phi1(tab, t);
        const double z = hardy_z(t);
        CHECK(fun().product_integrand(t, 2) == doctest::Approx(z * z * fun().product_integrand(y, 1)).epsilon(1e-10));
        const double w = eval_iterate(tab, t, 2);
        CHECK(fun().theorem2_integrand(t, 1, 1) ==
              doctest::Approx(fun().product_integrand(t, 1) * zeta_derivative_abs(w, 1)).epsilon(1e-10));
        const double s1 = fun().zeros().s1_of_t(y).value;
        CHECK(fun().s1_moment_integrand(t, 0, 2) == doctest::Approx(z * z * std::pow(s1, 4)).epsilon(1e-10));
    }
}

TEST_CASE("weighted product energy") {
    const auto spec = macro(20.0);
    const double plain = fun().product_energy(spec, 1).value;
    const auto one = fun().weighted_product_energy([](double) { return 1.0; }, spec, 1);
    CHECK(one.result.value == doctest::Approx(plain).epsilon(1e-7));
    CHECK_FALSE(one.sign_warning);
    const auto zero = fun().weighted_product_energy([](double) { return 0.0; }, spec, 1);
    CHECK(zero.result.value == 0.0);
    const auto mixed = fun().weighted_product_energy([](double t) { return std::sin(t); }, spec, 0);
    CHECK(mixed.sign_warning);
    CHECK(mixed.warning.find("changes sign") != std::string::npos);
}

TEST_CASE("Cauchy-Schwarz between the iterated and squared functionals") {
    const auto spec = macro(20.0);
    for (int r : {0, 1})
        for (int n : {0, 1}) {
            CAPTURE(r);
            CAPTURE(n);
            const double a = fun().theorem2_lhs(spec, r, n).value;
            const double b = fun().corollary_lhs(spec, r, n, 1).value;
            CHECK(a > 0.0);
            CHECK(a * a <= spec.U * b * (1 + 1e-7));
        }
}

TEST_CASE("highest squaring level stays finite") {
    const auto r = fun().corollary_lhs(macro(20.0), 1, 1, 2);
    CHECK(std::isfinite(r.value));
    CHECK(r.value > 0.0);
}

TEST_CASE("moment coefficients are exact fractions") {
    CHECK(moment_coefficient(1).str() == "1/2");
    CHECK(moment_coefficient(2).str() == "3/4");
    CHECK(moment_coefficient(3).str() == "15/8");
    CHECK(moment_coefficient(3).value() == 1.875);
    CHECK(moment_coefficient(20).str() == "319830986772877770815625/1048576");
    CHECK_THROWS_AS(moment_coefficient(0), DomainError);
}

TEST_CASE("|zeta| integral against a piecewise Simpson oracle") {
    const IntervalSpec shortspec{1000.0, 100.0, Regime::short_range, 0.01, 1.0};
    const double ref = oracle::abs_z_integral(1000.0, 1100.0);
    CHECK(fun().ramachandra_lhs(shortspec, 0).value == doctest::Approx(ref).epsilon(1e-5));
    CHECK(fun().first_power_product(macro(20.0), 0).value ==
          doctest::Approx(oracle::abs_z_integral(1000.0, 1020.0)).epsilon(1e-4));
}

TEST_CASE("remark integrals reduce to the plain ones") {
    // m = 0 turns |zeta|^{2^{m+1}} back into |zeta|^2
    const auto spec = macro(20.0);
    CHECK(fun().remark_lhs(Functionals::RemarkKind::product, spec, 1, 0, 1).value ==
          doctest::Approx(fun().product_energy(spec, 1).value).epsilon(1e-7));
}
