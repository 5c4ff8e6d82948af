#include "doctest.h"

#include "ladderlab/errors.hpp"
#include "ladderlab/special_functions.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace ladderlab;

// Reference values computed once with 30-digit arithmetic and frozen here.
TEST_CASE("theta matches frozen high-precision values") {
    CHECK(theta(5.0) == doctest::Approx(-3.45962037536346253).epsilon(1e-13));
    CHECK(theta(20.0) == doctest::Approx(1.18689480844448404).epsilon(1e-13));
    CHECK(theta(100.0) == doctest::Approx(87.9721652317872196).epsilon(1e-14));
    CHECK(theta(1000.0) == doctest::Approx(2034.54642803803160870).epsilon(1e-14));
}

TEST_CASE("Z matches frozen high-precision values") {
    struct Row {
        double t, z;
    };
    const Row rows[] = {{20.0, 1.14784241218519728},   {31.5, -0.900520113834715788},
                        {50.0, -0.340735005955024983}, {100.0, 2.69269705666446347},
                        {1000.0, 0.997794637521586614}, {10000.0, -0.341394724231208559}};
    for (const auto& row : rows) {
        CAPTURE(row.t);
        CHECK(std::abs(hardy_z(row.t) - row.z) <= 1e-9);
    }
}

TEST_CASE("Z agrees with the long-double Euler-Maclaurin oracle") {
    for (double t : {55.5, 123.4, 777.7, 2500.25, 9999.9, 31415.9}) {
        CAPTURE(t);
        CHECK(std::abs(hardy_z(t) - oracle::hardy_z(t)) <= 1e-9);
    }
}

TEST_CASE("Z vanishes at the first zero and at the Lehmer pair") {
    CHECK(std::abs(hardy_z(14.1347251417346938)) < 1e-9);
    CHECK(std::abs(hardy_z(7005.06286617492058)) < 1e-8);
    CHECK(std::abs(hardy_z(7005.10056467264672)) < 1e-8);
    // the pair is close enough that Z barely leaves zero between them
    CHECK(std::abs(hardy_z(7005.0817)) < 0.01);
}

TEST_CASE("Euler-Maclaurin zeta at s = 1/2") {
    const auto z = zeta_euler_maclaurin({0.5, 0.0}, 20, 12);
    CHECK(z.real() == doctest::Approx(-1.46035450880958681).epsilon(1e-13));
    CHECK(std::abs(z.imag()) < 1e-14);
}

TEST_CASE("|zeta'|, |zeta''|, ... match frozen values") {
    const double t_values[] = {100.0, 500.5, 1000.0};
    const double expected[4][3] = {{3.73236986703917, 3.39117277293138, 5.39407998335677},
                                   {9.57036079925473, 17.1737652999704, 25.6970534749605},
                                   {25.4118062558334, 77.4447867476174, 126.762376031475},
                                   {68.0423020919283, 344.174263947555, 634.957833392273}};
    for (int r = 1; r <= 4; ++r)
        for (int j = 0; j < 3; ++j) {
            CAPTURE(r);
            CAPTURE(t_values[j]);
            CHECK(zeta_derivative_abs(t_values[j], r) == doctest::Approx(expected[r - 1][j]).epsilon(1e-6));
        }
    CHECK(zeta_derivative_abs(1000.0, 0) == doctest::Approx(0.997794637521586614).epsilon(1e-9));
}

TEST_CASE("zero counting") {
    CHECK(zero_count(50.0) == 10);
    CHECK(zero_count(100.0) == 29);
    CHECK(zero_count(1000.0) == 649);
    CHECK(zero_count(7005.0) == 6708);
    CHECK(zero_count(7005.2) == 6710);
    CHECK(zero_count(100.0) == oracle::sign_changes([](double t) { return oracle::hardy_z(t); }, 10.0, 100.0, 0.05));
}

TEST_CASE("zero table") {
    const auto zt = ZeroTable::build(1.0e4 + 1);
    CHECK(zt.count(1.0e4) == 10142);
    CHECK(zt.count(1000.0) == 649);
    CHECK(zt.zeros().front() == doctest::Approx(14.1347251417346938).epsilon(1e-10));
    const auto pair = zt.zeros_between(7005.0, 7005.2);
    REQUIRE(pair.size() == 2);
    CHECK(pair[0] == doctest::Approx(7005.06286617492058).epsilon(1e-12));
    CHECK(pair[1] == doctest::Approx(7005.10056467264672).epsilon(1e-12));
    CHECK(zt.s1_of_t(1.0e4).value == doctest::Approx(-0.936774).epsilon(1e-5));
    CHECK_THROWS_AS(zt.count(pair[0]), DomainError);
    CHECK_THROWS_AS(zt.count(2.0e4), DomainError);
}

TEST_CASE("S(t) is N - 1 - theta/pi") {
    const double t = 1000.0;
    CHECK(s_of_t(t) == doctest::Approx(649 - 1 - theta(t) / M_PI).epsilon(1e-12));
}

TEST_CASE("domain checks") {
    CHECK_THROWS_AS(hardy_z(std::nan("")), DomainError);
    CHECK_THROWS_AS(hardy_z(-1.0), DomainError);
    CHECK_THROWS_AS(hardy_z(2 * kMaxHeight), DomainError);
    CHECK_THROWS_AS(zeta_derivative_abs(100.0, 5), DomainError);
    EvalConfig bad;
    bad.rs_correction_terms = 6;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = {};
    bad.fd_order = 3;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("difference orders 2 and 4 agree") {
    EvalConfig second;
    second.fd_order = 2;
    for (double t : {150.0, 1234.5, 9876.5})
        for (int r = 1; r <= 2; ++r) {
            CAPTURE(t);
            CAPTURE(r);
            CHECK(zeta_derivative_abs(t, r, second) == doctest::Approx(zeta_derivative_abs(t, r)).epsilon(1e-3));
        }
}

TEST_CASE("S jumps by one across each zero") {
    const auto zt = ZeroTable::build(200.0);
    const auto zs = zt.zeros_between(10.0, 200.0);
    REQUIRE(zs.size() >= 50);
    for (std::size_t i = 0; i < 50; ++i) {
        const double g = zs[i];
        const double jump = zt.s_of_t(g + 1e-6) - zt.s_of_t(g - 1e-6);
        CAPTURE(g);
        CHECK(jump == doctest::Approx(1.0).epsilon(1e-5));
    }
}

TEST_CASE("S1 is additive and matches a fixed-step Simpson sum") {
    const auto zt = ZeroTable::build(1100.0);
    const double a = 1000.0, b = 1050.0;
    // S jumps at every zero, where Simpson is only first order: each of the ~33
    // jumps costs at most about h, so h = 2e-5 keeps the total under 1e-3.
    const double simpson = oracle::simpson([&](double t) { return zt.s_of_t(t, false); }, a, b, 2500000);
    const double diff = zt.s1_of_t(b).value - zt.s1_of_t(a).value;
    CHECK(std::abs(diff - simpson) <= 1e-3 * std::max(1.0, std::abs(diff)));
}

TEST_CASE("zero count is monotone") {
    long prev = 0;
    for (double t = 20.0; t <= 400.0; t += 7.3) {
        const long n = zero_count(t);
        CHECK(n >= prev);
        prev = n;
    }
}
