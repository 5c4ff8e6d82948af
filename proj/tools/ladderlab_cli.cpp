// Command-line front end over the C interface.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or config error,
// 3 numeric non-convergence.

#include "ladderlab/ladderlab.h"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;

int exit_for(ll_status s) {
    switch (s) {
        case LL_OK: return 0;
        case LL_ERR_CONVERGENCE:
        case LL_ERR_AMBIGUITY: return kExitNoConvergence;
        default: return kExitUsage;
    }
}

int report(ll_status s, const std::string& what) {
    std::fprintf(stderr, "ladderlab: %s: %s: %s\n", what.c_str(), ll_status_name(s), ll_last_error());
    return exit_for(s);
}

struct TableDeleter {
    void operator()(ll_table* t) const { ll_table_free(t); }
};
struct ContextDeleter {
    void operator()(ll_context* c) const { ll_context_free(c); }
};
struct ConfigDeleter {
    void operator()(ll_config* c) const { ll_config_free(c); }
};
using TablePtr = std::unique_ptr<ll_table, TableDeleter>;

std::string missing_table_hint(const std::string& what) {
    return what +
           " needs a ladder table. Build one with\n"
           "  ladderlab ladder build --t-start 1000 --t-end 12000 --out ladder.csv\n"
           "and pass --table ladder.csv";
}

int load_table(const std::string& path, TablePtr& out) {
    ll_table* t = nullptr;
    const auto s = ll_table_load(path.c_str(), nullptr, &t);
    if (s != LL_OK) return report(s, "loading " + path);
    out.reset(t);
    return 0;
}

void print_kv(const char* key, double v) { std::printf("%s = %.17g\n", key, v); }

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string what;
    double t = 0.0;
    int r = 1;
    int k = 1;
    std::string table;
};

int cmd_eval(const EvalArgs& a) {
    ll_eval_config cfg;
    ll_eval_config_default(&cfg);
    double value = 0.0;
    double err = 0.0;
    ll_status s = LL_OK;
    if (a.what == "theta") {
        s = ll_theta(a.t, &cfg, &value);
        err = 1e-15 * std::abs(value);
    } else if (a.what == "z") {
        s = ll_hardy_z(a.t, &cfg, &value);
        err = cfg.target_abs_tol;
    } else if (a.what == "zeta-deriv") {
        s = ll_zeta_derivative_abs(a.t, a.r, &cfg, &value);
        err = cfg.fd_check_rel * std::abs(value);
    } else if (a.what == "s") {
        s = ll_s_of_t(a.t, &cfg, &value);
    } else if (a.what == "s1") {
        ll_integral r{};
        s = ll_s1_of_t(a.t, &cfg, &r);
        value = r.value;
        err = r.abs_error_est;
    } else if (a.what == "phi1" || a.what == "iterate") {
        if (a.table.empty()) {
            std::fprintf(stderr, "ladderlab: %s\n", missing_table_hint("eval " + a.what).c_str());
            return kExitUsage;
        }
        TablePtr table;
        if (int rc = load_table(a.table, table)) return rc;
        ll_table_info info{};
        ll_table_get_info(table.get(), &info);
        s = a.what == "phi1" ? ll_phi1(table.get(), a.t, &value) : ll_iterate(table.get(), a.t, a.k, &value);
        err = info.solve_tol * std::abs(value);
    } else {
        std::fprintf(stderr, "ladderlab: unknown quantity '%s'\n", a.what.c_str());
        return kExitUsage;
    }
    if (s != LL_OK) return report(s, "eval " + a.what);
    std::printf("%s(%.17g) = %.17g  err ~ %.3g\n", a.what.c_str(), a.t, value, err);
    return 0;
}

// ---------------------------------------------------------------------------

struct BuildArgs {
    double t_start = 100.0;
    double t_end = 1e4;
    double step = 10.0;
    double tol = 1e-9;
    int jobs = 1;
    std::string out = "ladder.csv";
};

int cmd_ladder_build(const BuildArgs& a) {
    ll_ladder_options o;
    ll_ladder_options_default(&o);
    o.t_start = a.t_start;
    o.t_end = a.t_end;
    o.step = a.step;
    o.solve_tol = a.tol;
    o.jobs = a.jobs;
    ll_table* raw = nullptr;
    auto s = ll_table_build(&o, &raw);
    if (s != LL_OK) return report(s, "ladder build");
    TablePtr table(raw);
    s = ll_table_save(table.get(), a.out.c_str());
    if (s != LL_OK) return report(s, "saving " + a.out);

    ll_table_info info{};
    ll_table_get_info(table.get(), &info);
    std::printf("table = %s\n", a.out.c_str());
    std::printf("rows = %zu\n", info.rows);
    std::printf("domain = [%.17g, %.17g]\n", info.t_front, info.t_back);
    std::printf("step = %.17g\n", info.step);
    std::printf("solve_tol = %.3g\n", info.solve_tol);
    std::printf("invariants = ok (t, phi1, energy ascending; phi1 < t; slopes positive)\n");
    std::printf("partial = %s\n", info.partial ? "true" : "false");
    for (std::size_t i = 0; i < info.failures; ++i) {
        double t = 0.0;
        const char* msg = nullptr;
        ll_table_failure(table.get(), i, &t, &msg);
        std::printf("failed t = %.17g: %s\n", t, msg);
    }
    std::printf("kernel_evaluations = %ld\n", info.kernel_evaluations);
    std::printf("build_seconds = %.2f\n", info.build_seconds);
    return info.partial ? kExitNoConvergence : 0;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
    std::string config;
    std::string claims;
    bool claims_set = false;
    std::string out;
    std::string format;
    std::string table;
    int jobs = 0;
    double T = 0.0;
    double epsilon = 0.0;
    double c_exp = 0.0;
    double tol = 0.0;
    std::vector<std::string> sets;
    std::string write_config;
};

int cmd_verify(const VerifyArgs& a) {
    ll_config* raw = nullptr;
    auto s = a.config.empty() ? ll_config_new(&raw) : ll_config_load(a.config.c_str(), &raw);
    if (s != LL_OK) return report(s, "config");
    std::unique_ptr<ll_config, ConfigDeleter> cfg(raw);

    auto set = [&](const std::string& key, const std::string& value) {
        const auto st = ll_config_set(cfg.get(), key.c_str(), value.c_str());
        return st == LL_OK ? 0 : report(st, "config " + key);
    };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    int rc = 0;
    if (a.claims_set && (rc = set("claims", a.claims))) return rc;
    if (!a.out.empty() && (rc = set("out_dir", a.out))) return rc;
    if (!a.format.empty() && (rc = set("format", a.format))) return rc;
    if (!a.table.empty() && (rc = set("table", a.table))) return rc;
    if (a.jobs > 0 && (rc = set("jobs", std::to_string(a.jobs)))) return rc;
    if (a.T > 0.0 && (rc = set("T", num(a.T)))) return rc;
    if (a.epsilon > 0.0 && (rc = set("epsilon", num(a.epsilon)))) return rc;
    if (a.c_exp > 0.0 && (rc = set("c_exp", num(a.c_exp)))) return rc;
    if (a.tol > 0.0 && (rc = set("rel_tol", num(a.tol)))) return rc;
    for (const auto& kv : a.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "ladderlab: --set expects key=value, got '%s'\n", kv.c_str());
            return kExitUsage;
        }
        if ((rc = set(kv.substr(0, eq), kv.substr(eq + 1)))) return rc;
    }
    if ((s = ll_config_validate(cfg.get())) != LL_OK) return report(s, "config");

    if (!a.write_config.empty()) {
        std::size_t n = 0;
        ll_config_text(cfg.get(), nullptr, 0, &n);
        std::string text(n + 1, '\0');
        ll_config_text(cfg.get(), text.data(), text.size(), &n);
        text.resize(n);
        std::FILE* f = std::fopen(a.write_config.c_str(), "wb");
        if (!f) {
            std::fprintf(stderr, "ladderlab: cannot write %s\n", a.write_config.c_str());
            return kExitUsage;
        }
        std::fwrite(text.data(), 1, text.size(), f);
        std::fclose(f);
    }

    ll_suite_summary sum{};
    s = ll_run_suite(cfg.get(), nullptr, &sum);
    if (s != LL_OK) return report(s, "verify");
    std::printf("reports = %d\npass = %d\nfail = %d\nskip = %d\nrecorded = %d\n", sum.reports, sum.passed,
                sum.failed, sum.skipped, sum.recorded);
    std::printf("result = %s\n", sum.failed == 0 ? "ok" : "failed");
    return sum.failed == 0 ? 0 : kExitVerifyFail;
}

// ---------------------------------------------------------------------------

struct FunctionalArgs {
    std::string name;
    double T = 1e4;
    double U = 0.0;
    bool U_set = false;
    int r = 0;
    int n = 0;
    int m = 1;
    int l = 1;
    double epsilon = 0.01;
    double c_exp = 2.0;
    double tol = 1e-8;
    std::string table;
};

int cmd_functional(const FunctionalArgs& a) {
    ll_interval spec{a.T, a.U, a.epsilon, a.c_exp};
    const ll_signal sig{a.r, a.n, a.m, a.l};
    char range[256];
    double lo = 0.0;
    double hi = 0.0;
    auto s = ll_functional_range(a.name.c_str(), &spec, &lo, &hi, range, sizeof range);
    if (s != LL_OK) return report(s, "functional");
    if (!a.U_set) spec.U = std::isfinite(hi) ? hi : lo;
    if (a.table.empty()) {
        std::fprintf(stderr, "ladderlab: %s\n", missing_table_hint("functional " + a.name).c_str());
        return kExitUsage;
    }
    TablePtr table;
    if (int rc = load_table(a.table, table)) return rc;
    ll_functional_options opts;
    ll_functional_options_default(&opts);
    opts.rel_tol = a.tol;
    ll_context* raw = nullptr;
    if ((s = ll_context_create(table.get(), &opts, &raw)) != LL_OK) return report(s, "functional");
    std::unique_ptr<ll_context, ContextDeleter> ctx(raw);

    ll_integral v{};
    s = ll_functional(ctx.get(), a.name.c_str(), &spec, &sig, &v);
    if (s != LL_OK) return report(s, "functional " + a.name);
    double shape = 0.0;
    ll_functional_shape(a.name.c_str(), &spec, &sig, &shape);

    ll_table_info info{};
    ll_table_get_info(table.get(), &info);
    std::printf("functional = %s\n", a.name.c_str());
    print_kv("T", spec.T);
    print_kv("U", spec.U);
    std::printf("r = %d\nn = %d\nm = %d\nl = %d\n", a.r, a.n, a.m, a.l);
    print_kv("value", v.value);
    print_kv("abs_error_est", v.abs_error_est);
    std::printf("evaluations = %ld\nconverged = %s\n", v.evaluations, v.converged ? "true" : "false");
    print_kv("shape", shape);
    print_kv("ratio", v.value / shape);
    std::printf("# provenance: table=%s rows=%zu domain=[%.10g, %.10g] rel_tol=%.3g range: %s; ladderlab %s\n",
                a.table.c_str(), info.rows, info.t_front, info.t_back, a.tol, range, ll_version());
    return v.converged ? 0 : kExitNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ladderlab: Jacob's ladder numerics on the critical line"};
    app.require_subcommand(1);
    int rc = 0;

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "point evaluation: theta, z, zeta-deriv, s, s1, phi1, iterate");
    eval->add_option("quantity", ea.what, "theta | z | zeta-deriv | s | s1 | phi1 | iterate")
        ->required()
        ->check(CLI::IsMember({"theta", "z", "zeta-deriv", "s", "s1", "phi1", "iterate"}));
    eval->add_option("--t", ea.t, "height")->required();
    eval->add_option("--r", ea.r, "derivative order for zeta-deriv (0..4)");
    eval->add_option("--k", ea.k, "iteration count for iterate");
    eval->add_option("--table", ea.table, "ladder table for phi1 / iterate");
    eval->callback([&] { rc = cmd_eval(ea); });

    BuildArgs ba;
    auto* ladder = app.add_subcommand("ladder", "ladder tables");
    ladder->require_subcommand(1);
    auto* build = ladder->add_subcommand("build", "solve and persist a ladder table");
    build->add_option("--t-start", ba.t_start, "first grid point");
    build->add_option("--t-end", ba.t_end, "last grid point");
    build->add_option("--step", ba.step, "grid step");
    build->add_option("--tol", ba.tol, "relative root tolerance");
    build->add_option("--jobs", ba.jobs, "worker threads");
    build->add_option("--out", ba.out, "output table file");
    build->callback([&] { rc = cmd_ladder_build(ba); });

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "run the verification suite and write a report bundle");
    verify->add_option("--config", va.config, "flat key = value config file");
    verify->add_option("--claims", va.claims, "comma-separated claim ids (empty: none)")
        ->each([&](const std::string&) { va.claims_set = true; });
    verify->add_option("--out", va.out, "report directory");
    verify->add_option("--format", va.format, "delimited | structured | both");
    verify->add_option("--table", va.table, "reuse a saved ladder table");
    verify->add_option("--jobs", va.jobs, "claims run concurrently");
    verify->add_option("--T", va.T, "base height");
    verify->add_option("--epsilon", va.epsilon, "regime epsilon");
    verify->add_option("--c-exp", va.c_exp, "short-regime exponent c");
    verify->add_option("--tol", va.tol, "relative quadrature tolerance");
    verify->add_option("--set", va.sets, "extra config entries, key=value");
    verify->add_option("--write-config", va.write_config, "save the effective config");
    verify->callback([&] { rc = cmd_verify(va); });

    FunctionalArgs fa;
    auto* fun = app.add_subcommand("functional", "evaluate one integral functional");
    std::vector<std::string> names;
    for (const char* const* p = ll_functional_names(); *p; ++p) names.emplace_back(*p);
    fun->add_option("name", fa.name, "functional name")->required()->check(CLI::IsMember(names));
    fun->add_option("--T", fa.T, "height");
    fun->add_option("--U", fa.U, "interval width (default: top of the admissible range)")
        ->each([&](const std::string&) { fa.U_set = true; });
    fun->add_option("--r", fa.r, "derivative order (0..4)");
    fun->add_option("--n", fa.n, "iteration depth (0..3)");
    fun->add_option("--m", fa.m, "squaring level (0..2)");
    fun->add_option("--l", fa.l, "moment order (1..3)");
    fun->add_option("--epsilon", fa.epsilon, "regime epsilon");
    fun->add_option("--c-exp", fa.c_exp, "short-regime exponent c");
    fun->add_option("--tol", fa.tol, "relative quadrature tolerance");
    fun->add_option("--table", fa.table, "ladder table");
    fun->callback([&] { rc = cmd_functional(fa); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    return rc;
}
