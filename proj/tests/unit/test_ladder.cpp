#include "doctest.h"

#include "fixture.hpp"
#include "ladderlab/errors.hpp"
#include "ladderlab/ladder.hpp"

#include <cmath>
#include <random>

using namespace ladderlab;

TEST_CASE("mu is 7 y ln y") {
    CHECK(mu(100.0) == doctest::Approx(700.0 * std::log(100.0)));
    CHECK_THROWS_AS(mu(2.0), DomainError);
}

TEST_CASE("table rows satisfy the defining equation") {
    const auto& L = fixture::ladder();
    const auto& tab = fixture::table();
    REQUIRE(tab.size() == 61);
    CHECK_FALSE(tab.partial);
    for (std::size_t i = 0; i < tab.size(); i += 6) {
        const double E = L.cumulative_energy(tab.t[i]).value;
        const double K = L.kernel_energy(2 * tab.phi1[i]).value;
        CAPTURE(tab.t[i]);
        CHECK(std::abs(K - E) / E <= 1e-8);
    }
}

TEST_CASE("interpolated phi1 satisfies the defining equation between knots") {
    const auto& L = fixture::ladder();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(700.0, 1300.0);
    for (int i = 0; i < 20; ++i) {
        const double T = u(rng);
        const double E = L.cumulative_energy(T).value;
        CAPTURE(T);
        CHECK(std::abs(L.kernel_energy(2 * eval_phi1(fixture::table(), T)).value - E) / E <= 1e-8);
    }
}

TEST_CASE("moment-cache kernel agrees with direct quadrature") {
    // Independent of the block moments: Z^2 e^{-2t/x} integrated straight from
    // Z, far enough out that the truncated tail is below 1e-13 of the total.
    const double T = 1000.0;
    const double x = 2 * eval_phi1(fixture::table(), T);
    auto z2 = [](double t) { return hardy_z(t) * hardy_z(t); };
    const double E = integrate_relative(z2, 0.0, T, 1e-12).value;
    const double K = integrate_relative([&](double t) { return z2(t) * std::exp(-2 * t / x); }, 0.0, 16 * x, 1e-12).value;
    CHECK(E == doctest::Approx(table_energy(fixture::table(), T)).epsilon(1e-10));
    CHECK(std::abs(K - E) / E <= 1e-8);
}

TEST_CASE("phi1 is increasing and below the diagonal") {
    const auto& tab = fixture::table();
    double prev = 0.0;
    for (double t = 700.0; t <= 1300.0; t += 0.37) {
        const double y = eval_phi1(tab, t);
        CHECK(y < t);
        CHECK(y > prev);
        prev = y;
    }
    CHECK(eval_phi1(tab, 1000.0) == doctest::Approx(933.810508549063).epsilon(1e-9));
}

TEST_CASE("iterates") {
    const auto& tab = fixture::table();
    CHECK(eval_iterate(tab, 1234.5, 0) == 1234.5);
    CHECK(eval_iterate(tab, 1234.5, 2) == eval_phi1(tab, eval_phi1(tab, 1234.5)));
    CHECK(eval_iterate(tab, 1234.5, 3) < eval_iterate(tab, 1234.5, 2));
    CHECK_THROWS_WITH_AS(eval_iterate(tab, 800.0, 4), doctest::Contains("depth"), DomainError);
    CHECK_THROWS_AS(eval_phi1(tab, 650.0), DomainError);
}

TEST_CASE("preimage round trip") {
    const auto& tab = fixture::table();
    const double T = 1000.0, U = 57.0;
    const auto [a, b] = preimage_interval(tab, T, U);
    CHECK(a > T);
    CHECK(b > T + U);
    CHECK(std::abs(eval_phi1(tab, a) - T) <= 1e-8 * T);
    CHECK(std::abs(eval_phi1(tab, b) - (T + U)) <= 1e-8 * (T + U));
    const auto [c, d] = preimage_interval(tab, T, 0.0);
    CHECK(c == d);
    CHECK_THROWS_AS(phi1_inverse(tab, 1290.0), DomainError);
}

TEST_CASE("option validation") {
    LadderOptions o = fixture::small_options();
    o.step = 0.0;
    CHECK_THROWS_AS(o.validate(), DomainError);
    o = fixture::small_options();
    o.t_start = 50.0;
    CHECK_THROWS_AS(o.validate(), DomainError);
    o = fixture::small_options();
    o.t_end = 600.0;
    CHECK_THROWS_AS(o.validate(), DomainError);
    CHECK_THROWS_AS(fixture::ladder().solve(500.0), DomainError);
}

TEST_CASE("save and load") {
    const auto& tab = fixture::table();
    const auto path = fixture::scratch("small.table");
    tab.save(path.string());
    const auto back = LadderTable::load(path.string());
    CHECK(back.t == tab.t);
    CHECK(back.phi1 == tab.phi1);
    CHECK(back.energy == tab.energy);
    CHECK(back.slope == tab.slope);
    CHECK(eval_phi1(back, 1111.1) == eval_phi1(tab, 1111.1));

    const auto again = fixture::scratch("small-again.table");
    back.save(again.string());
    CHECK(fixture::slurp(path) == fixture::slurp(again));
}

TEST_CASE("rebuilding gives a byte-identical file") {
    const auto first = fixture::scratch("rebuild-a.table");
    const auto second = fixture::scratch("rebuild-b.table");
    fixture::table().save(first.string());
    Ladder(fixture::small_options()).build_table().save(second.string());
    CHECK(fixture::slurp(first) == fixture::slurp(second));
}

TEST_CASE("loader refusals") {
    const auto path = fixture::scratch("edit.table");
    fixture::table().save(path.string());
    const std::string good = fixture::slurp(path);

    SUBCASE("format version") {
        std::string s = good;
        s.replace(s.find("format_version=1"), 16, "format_version=2");
        fixture::spit(path, s);
        CHECK_THROWS_WITH_AS(LadderTable::load(path.string()), doctest::Contains("format version"), FormatError);
    }
    SUBCASE("non-monotone rows") {
        // swap the phi1 values of two neighbouring rows
        std::string s = good;
        const auto r1 = s.find("\n800,");
        const auto r2 = s.find("\n810,");
        const auto row = [&](std::size_t at) { return s.substr(at + 1, s.find('\n', at + 1) - at - 1); };
        std::string a = row(r1), b = row(r2);
        const auto field = [](const std::string& r) { return r.substr(r.find(',') + 1, r.find(',', r.find(',') + 1) - r.find(',') - 1); };
        const std::string fa = field(a), fb = field(b);
        std::string a2 = a, b2 = b;
        a2.replace(a2.find(fa), fa.size(), fb);
        b2.replace(b2.find(fb), fb.size(), fa);
        s.replace(s.find(a), a.size(), a2);
        s.replace(s.find(b), b.size(), b2);
        fixture::spit(path, s);
        CHECK_THROWS_WITH_AS(LadderTable::load(path.string()), doctest::Contains("phi1 not strictly increasing"),
                             InvariantError);
    }
    SUBCASE("truncated row") {
        std::string s = good;
        s.replace(s.find("\n900,"), 5, "\n900\n");
        fixture::spit(path, s);
        CHECK_THROWS_AS(LadderTable::load(path.string()), FormatError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(LadderTable::load(fixture::scratch("nope.table").string()), FormatError);
    }
}
