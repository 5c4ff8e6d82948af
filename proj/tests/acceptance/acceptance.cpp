// Acceptance run: one line per criterion, exit status = number of failures.
// Usage: acceptance [work_dir] [cache_dir]

#include "ladderlab/config.hpp"
#include "ladderlab/errors.hpp"
#include "ladderlab/ladder.hpp"
#include "ladderlab/special_functions.hpp"
#include "ladderlab/verification.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace ladderlab;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;
int evaluated = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
    ++evaluated;
    if (!ok) ++failures;
    std::printf("criterion %2d %-4s %s: %s\n", id, ok ? "PASS" : "FAIL", title, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// Rows of one claim that carry a band (pass or fail), optionally filtered.
std::vector<const VerificationReport*> banded(const SuiteResult& s, const std::string& claim,
                                              const std::function<bool(const VerificationReport&)>& keep = {}) {
    std::vector<const VerificationReport*> out;
    for (const auto& r : s.reports) {
        if (r.claim_id != claim || (r.status != Status::pass && r.status != Status::fail)) continue;
        if (keep && !keep(r)) continue;
        out.push_back(&r);
    }
    return out;
}

// PASS when every row passed; detail lists the ratios.
void band_criterion(int id, const char* title, const std::vector<const VerificationReport*>& rows) {
    std::ostringstream d;
    bool ok = !rows.empty();
    for (const auto* r : rows) {
        ok = ok && r->status == Status::pass;
        d << (d.tellp() ? "; " : "") << r->claim_id << (r->variant.empty() ? "" : "/" + r->variant) << " T=" << r->spec.T
          << " U=" << fmt("%.4g", r->spec.U) << " r=" << r->params.r << " n=" << r->params.n << " m=" << r->params.m
          << " ratio=" << fmt("%.4f", r->ratio) << " in [" << fmt("%.4g", r->band_lo) << ", "
          << fmt("%.4g", r->band_hi) << "]" << (r->status == Status::pass ? "" : " FAIL");
        if (!r->reason.empty()) d << " (" << r->reason << ")";
    }
    if (rows.empty()) d << "no rows";
    report(id, title, ok, d.str());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::current_path() / "acceptance-work";
    const std::string cache = argc > 2 ? argv[2] : (work / "cache").string();
    fs::create_directories(work);
    fs::create_directories(cache);
    const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    // 1. special functions against the independent oracle
    {
        const auto t0 = Clock::now();
        double worst = 0.0, worst_t = 0.0;
        const int points = 1000;
        for (int i = 0; i < points; ++i) {
            // geometric grid over [50, 1e5]
            const double t = 50.0 * std::pow(2000.0, static_cast<double>(i) / (points - 1));
            const double d = std::abs(hardy_z(t) - oracle::hardy_z(t));
            if (d > worst) {
                worst = d;
                worst_t = t;
            }
        }
        auto z = [](double t) { return oracle::hardy_z(t); };
        const long n100 = zero_count(100.0), n50 = zero_count(50.0);
        const long s100 = oracle::sign_changes(z, 10.0, 100.0, 0.005);
        const long s50 = oracle::sign_changes(z, 10.0, 50.0, 0.005);
        const bool ok = worst <= 1e-6 && n100 == 29 && n50 == 10 && s100 == 29 && s50 == 10;
        std::ostringstream d;
        d << "max |Z - oracle| = " << fmt("%.3g", worst) << " at t = " << fmt("%.6g", worst_t)
          << " over 1000 points; N(100) = " << n100 << " (scan " << s100 << "), N(50) = " << n50 << " (scan " << s50
          << "); " << fmt("%.1f", seconds_since(t0)) << " s";
        report(1, "special-function fidelity", ok, d.str());
    }

    // One table for criteria 2-9, sized for the default suite.
    RunConfig cfg;
    cfg.jobs = jobs;
    cfg.cache_dir = cache;
    cfg.out_dir = (work / "run1").string();
    fs::remove_all(cfg.out_dir);
    const auto [a, b] = required_table_range(cfg);
    LadderOptions opts;
    opts.t_start = a;
    opts.t_end = b;
    opts.step = cfg.step;
    opts.solve_tol = cfg.solve_tol;
    opts.tail_eps = cfg.tail_eps;
    opts.jobs = jobs;
    opts.cache_dir = cache;
    const auto t_build = Clock::now();
    const Ladder ladder(opts);
    const LadderTable table = ladder.build_table();
    std::printf("# table [%g, %g], %zu rows, %d job(s), %.1f s\n", table.front(), table.back(), table.size(), jobs,
                seconds_since(t_build));

    // 2. defining equation at random heights, through the interpolated table
    {
        const auto t0 = Clock::now();
        std::mt19937_64 rng(20240611);
        std::uniform_real_distribution<double> u(1e3, 1e4);
        double worst = 0.0, worst_T = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double T = u(rng);
            const double E = ladder.cumulative_energy(T).value;
            const double K = ladder.kernel_energy(2.0 * eval_phi1(table, T)).value;
            const double res = std::abs(K - E) / E;
            if (res > worst) {
                worst = res;
                worst_T = T;
            }
        }
        report(2, "ladder defining equation", worst <= 1e-8,
               "max residual " + fmt("%.3g", worst) + " at T = " + fmt("%.6g", worst_T) + " over 100 seeded T; " +
                   fmt("%.1f", seconds_since(t0)) + " s (+ table build)");
    }

    const auto t_run1 = Clock::now();
    const SuiteResult run1 = run_suite(cfg, table);
    const double run1_s = seconds_since(t_run1);
    std::printf("# suite run 1: %zu reports (%d pass, %d fail, %d skip, %d recorded), %.1f s\n", run1.reports.size(),
                run1.passed, run1.failed, run1.skipped, run1.recorded, run1_s);

    band_criterion(3, "density, integral form", banded(run1, "density"));
    band_criterion(4, "macroscopic increment", banded(run1, "increment", [](const auto& r) { return r.variant.empty(); }));
    band_criterion(5, "product asymptotic", banded(run1, "product"));
    band_criterion(6, "transfer", banded(run1, "transfer"));
    {
        std::vector<const VerificationReport*> rows;
        auto keep = [](const VerificationReport& r) { return r.params.r <= 1 && r.params.n <= 1 && r.params.m == 1; };
        for (const char* claim : {"short-interval", "iterated", "squared"}) {
            const auto part = banded(run1, claim, keep);
            rows.insert(rows.end(), part.begin(), part.end());
        }
        band_criterion(7, "constant stability and Cauchy consistency", rows);
    }
    band_criterion(8, "fourth-power shape", banded(run1, "fourth-power", [](const auto& r) { return r.params.n == 0; }));
    band_criterion(9, "argument moment l = 1", banded(run1, "arg-moment", [](const auto& r) { return r.params.l == 1; }));

    // 10. a second, independent run (table rebuilt from the persisted caches)
    {
        RunConfig again = cfg;
        again.out_dir = (work / "run2").string();
        fs::remove_all(again.out_dir);
        const auto t0 = Clock::now();
        const SuiteResult run2 = run_suite(again);
        const double run2_s = seconds_since(t0);
        bool same = run1.files == run2.files && !run1.files.empty();
        std::string diff;
        for (const auto& f : run1.files) {
            if (slurp(fs::path(cfg.out_dir) / f) != slurp(fs::path(again.out_dir) / f)) {
                same = false;
                diff += " " + f;
            }
        }
        std::ostringstream d;
        d << run1.files.size() << " bundle files " << (same ? "bit-identical" : "differ:" + diff)
          << "; full default suite " << fmt("%.0f", run2_s) << " s wall with " << jobs << " job(s), budget 3600 s";
        report(10, "determinism", same && run2_s <= 3600.0, d.str());
    }

    std::printf("criteria evaluated: %d, passed: %d, failed: %d\n", evaluated, evaluated - failures, failures);
    return failures;
}
