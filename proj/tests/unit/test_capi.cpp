#include "doctest.h"

#include "ladderlab/ladderlab.h"

#include <cmath>
#include <cstring>
#include <string>

TEST_CASE("status names and version") {
    CHECK(std::string(ll_status_name(LL_OK)) == "ok");
    CHECK(std::string(ll_version()) == "0.1.0");
}

TEST_CASE("point evaluations") {
    double z = 0.0;
    REQUIRE(ll_hardy_z(100.0, nullptr, &z) == LL_OK);
    CHECK(z == doctest::Approx(2.69269705666446347).epsilon(1e-10));
    long n = 0;
    REQUIRE(ll_zero_count(100.0, nullptr, &n) == LL_OK);
    CHECK(n == 29);
    CHECK(ll_hardy_z(-5.0, nullptr, &z) == LL_ERR_DOMAIN);
    CHECK(std::strstr(ll_last_error(), "t outside supported range") != nullptr);
    CHECK(ll_hardy_z(100.0, nullptr, nullptr) == LL_ERR_NULL);
    ll_eval_config cfg;
    ll_eval_config_default(&cfg);
    cfg.fd_order = 5;
    CHECK(ll_zeta_derivative_abs(100.0, 1, &cfg, &z) == LL_ERR_DOMAIN);
}

TEST_CASE("null handles") {
    double v = 0.0;
    CHECK(ll_phi1(nullptr, 1000.0, &v) == LL_ERR_NULL);
    CHECK(ll_functional(nullptr, "product", nullptr, nullptr, nullptr) == LL_ERR_NULL);
    CHECK(ll_run_suite(nullptr, nullptr, nullptr) == LL_ERR_NULL);
    ll_table_free(nullptr);
    ll_context_free(nullptr);
    ll_config_free(nullptr);
}

TEST_CASE("table, context and functionals") {
    ll_ladder_options opts;
    ll_ladder_options_default(&opts);
    opts.t_start = 900.0;
    opts.t_end = 1200.0;
    ll_table* table = nullptr;
    REQUIRE(ll_table_build(&opts, &table) == LL_OK);
    ll_table_info info;
    REQUIRE(ll_table_get_info(table, &info) == LL_OK);
    CHECK(info.rows == 31);
    CHECK(info.partial == 0);

    double y = 0.0, back = 0.0;
    REQUIRE(ll_phi1(table, 1000.0, &y) == LL_OK);
    CHECK(y == doctest::Approx(933.810508549063).epsilon(1e-9));
    REQUIRE(ll_phi1_inverse(table, y, &back) == LL_OK);
    CHECK(back == doctest::Approx(1000.0).epsilon(1e-10));
    CHECK(ll_phi1(table, 10.0, &y) == LL_ERR_DOMAIN);

    ll_context* ctx = nullptr;
    REQUIRE(ll_context_create(table, nullptr, &ctx) == LL_OK);
    ll_interval iv{1000.0, 20.0, 0.01, 2.0};
    ll_signal sig{0, 0, 1, 1};
    ll_integral out;
    REQUIRE(ll_functional(ctx, "product", &iv, &sig, &out) == LL_OK);
    CHECK(out.converged == 1);
    CHECK(out.value > 0.0);

    iv.U = 50.0;
    CHECK(ll_functional(ctx, "iterated", &iv, &sig, &out) == LL_ERR_REGIME);
    CHECK(std::strstr(ll_last_error(), "T/ln²T") != nullptr);
    CHECK(ll_functional(ctx, "no-such", &iv, &sig, &out) == LL_ERR_DOMAIN);

    char text[128];
    double lo = 0.0, hi = 0.0;
    REQUIRE(ll_functional_range("iterated", &iv, &lo, &hi, text, sizeof text) == LL_OK);
    CHECK(hi == doctest::Approx(1000.0 / std::pow(std::log(1000.0), 2)));

    ll_context_free(ctx);
    ll_table_free(table);
}

TEST_CASE("moment coefficient") {
    char text[64];
    double v = 0.0;
    REQUIRE(ll_moment_coefficient(2, text, sizeof text, &v) == LL_OK);
    CHECK(std::string(text) == "3/4");
    CHECK(v == 0.75);
    CHECK(ll_moment_coefficient(0, text, sizeof text, &v) == LL_ERR_DOMAIN);
}

TEST_CASE("config handles") {
    ll_config* cfg = nullptr;
    REQUIRE(ll_config_new(&cfg) == LL_OK);
    CHECK(ll_config_set(cfg, "T", "20000") == LL_OK);
    CHECK(ll_config_set(cfg, "bogus", "1") == LL_ERR_FORMAT);
    size_t needed = 0;
    REQUIRE(ll_config_text(cfg, nullptr, 0, &needed) == LL_OK);
    std::string buf(needed + 1, '\0');
    REQUIRE(ll_config_text(cfg, buf.data(), buf.size(), &needed) == LL_OK);
    CHECK(buf.find("T = 20000") != std::string::npos);
    ll_config* again = nullptr;
    REQUIRE(ll_config_parse(buf.c_str(), &again) == LL_OK);
    ll_config_free(again);
    CHECK(ll_config_parse("T = 1\nwhat = 2\n", &again) == LL_ERR_FORMAT);
    CHECK(ll_config_set(cfg, "claims", "density,nonsense") == LL_OK);
    CHECK(ll_config_validate(cfg) == LL_ERR_DOMAIN);
    ll_config_free(cfg);

    int count = 0;
    for (const char* const* id = ll_claim_ids(); *id; ++id) ++count;
    CHECK(count == 13);
}
