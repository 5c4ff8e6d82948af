#include "doctest.h"

#include "fixture.hpp"
#include "ladderlab/config.hpp"
#include "ladderlab/errors.hpp"
#include "ladderlab/verification.hpp"

#include <filesystem>

using namespace ladderlab;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const std::string& out) {
    RunConfig c;
    c.T = 1000.0;
    c.density_pairs = {{1000.0, 100.0}};
    c.claims = {"density", "product", "weighted"};
    c.out_dir = fixture::scratch(out).string();
    fs::remove_all(c.out_dir);
    return c;
}

const Status* status_of(const SuiteResult& r, const std::string& claim) {
    for (const auto& row : r.reports)
        if (row.claim_id == claim) return &row.status;
    return nullptr;
}

}  // namespace

TEST_CASE("config text round trip") {
    RunConfig c;
    c.T = 2e4;
    c.epsilon = 0.02;
    c.stability_T = {1e4, 3e4};
    c.density_pairs = {{1e3, 50.0}};
    c.claims = {"product", "squared"};
    c.bands["product"] = {0.5, 2.0};
    c.format = "structured";
    const RunConfig back = RunConfig::parse(c.to_text());
    CHECK(back == c);
    CHECK(back.bands.at("product").second == 2.0);
    CHECK(back.stability_T.size() == 2);
    CHECK(RunConfig::parse("").claims == known_claims());
}

TEST_CASE("config errors") {
    CHECK_THROWS_WITH_AS(RunConfig::parse("T = 1e4\nbogus = 3\n"), doctest::Contains("line 2"), FormatError);
    CHECK_THROWS_AS(RunConfig::parse("T = ten\n"), FormatError);
    RunConfig c;
    c.claims = {"no-such-claim"};
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = RunConfig();
    c.format = "xml";
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = RunConfig();
    c.set("epsilon", "0.03");
    CHECK(c.epsilon == 0.03);
    CHECK_THROWS_AS(c.set("nope", "1"), FormatError);
}

TEST_CASE("table extent follows the enabled claims") {
    RunConfig c;
    c.claims = {"density"};
    const auto [a, b] = required_table_range(c);
    CHECK(a <= 750.0);
    CHECK(b >= 11000.0);
    c.claims.clear();
    CHECK(required_table_range(c).second == 0.0);
}

TEST_CASE("empty claim list writes an empty bundle") {
    RunConfig c = small_config("empty");
    c.claims.clear();
    const auto r = run_suite(c);
    CHECK(r.reports.empty());
    CHECK(r.ok());
    CHECK(fs::exists(fs::path(c.out_dir) / "summary.txt"));
    CHECK(fixture::slurp(fs::path(c.out_dir) / "summary.csv").find("claim_id,variant") == 0);
}

TEST_CASE("small suite passes and is reproducible") {
    const RunConfig a = small_config("run-a");
    RunConfig b = small_config("run-b");
    const auto ra = run_suite(a, fixture::table());
    b.jobs = 2;
    const auto rb = run_suite(b, fixture::table());
    CHECK(ra.failed == 0);
    CHECK(ra.passed >= 3);
    REQUIRE(ra.files == rb.files);
    for (const auto& f : ra.files) {
        CAPTURE(f);
        CHECK(fixture::slurp(fs::path(a.out_dir) / f) == fixture::slurp(fs::path(b.out_dir) / f));
    }
    CHECK(std::find(ra.files.begin(), ra.files.end(), "timing.csv") == ra.files.end());
    CHECK(fs::exists(fs::path(a.out_dir) / "timing.csv"));
    CHECK(fs::exists(fs::path(a.out_dir) / "plot" / "product.dat"));
}

TEST_CASE("a band that excludes the measurement fails") {
    RunConfig c = small_config("forced");
    c.claims = {"product"};
    c.bands["product"] = {2.0, 3.0};
    const auto r = run_suite(c, fixture::table());
    CHECK(r.failed > 0);
    CHECK_FALSE(r.ok());
    REQUIRE(status_of(r, "product"));
    CHECK(*status_of(r, "product") == Status::fail);
    CHECK(fixture::slurp(fs::path(c.out_dir) / "summary.txt").find("result = failed") != std::string::npos);
}

TEST_CASE("out-of-range claims are skipped, not failed") {
    RunConfig c = small_config("skips");
    c.claims = {"arg-moment"};  // empty regime at T = 1000
    const auto r = run_suite(c, fixture::table());
    CHECK(r.failed == 0);
    CHECK(r.skipped > 0);
}

TEST_CASE("a broken table aborts the suite") {
    const auto path = fixture::scratch("broken.table");
    LadderTable t = fixture::table();
    t.save(path.string());
    std::string text = fixture::slurp(path);
    // duplicate a row so t stops increasing, and fix up the row count
    const auto at = text.find("\n900,");
    const auto end = text.find('\n', at + 1);
    text.insert(end, text.substr(at, end - at));
    const auto rows = text.find("rows=61");
    text.replace(rows, 7, "rows=62");
    fixture::spit(path, text);

    RunConfig c = small_config("broken");
    c.table = path.string();
    CHECK_THROWS_WITH_AS(run_suite(c), doctest::Contains("not strictly increasing"), InvariantError);
}
