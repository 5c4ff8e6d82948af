#include "ladderlab/ladderlab.h"

#include "ladderlab/config.hpp"
#include "ladderlab/errors.hpp"
#include "ladderlab/functionals.hpp"
#include "ladderlab/ladder.hpp"
#include "ladderlab/verification.hpp"

#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <numbers>
#include <string>
#include <vector>

using namespace ladderlab;

struct ll_table {
    LadderTable table;
};

struct ll_context {
    std::unique_ptr<Functionals> fun;
};

struct ll_config {
    RunConfig cfg;
};

namespace {

thread_local std::string last_error;

template <typename Body>
ll_status guarded(Body&& body) {
    try {
        body();
        last_error.clear();
        return LL_OK;
    } catch (const RegimeError& e) {
        last_error = e.what();
        return LL_ERR_REGIME;
    } catch (const DomainError& e) {
        last_error = e.what();
        return LL_ERR_DOMAIN;
    } catch (const ConvergenceError& e) {
        last_error = e.what();
        return LL_ERR_CONVERGENCE;
    } catch (const AmbiguityError& e) {
        last_error = e.what();
        return LL_ERR_AMBIGUITY;
    } catch (const FormatError& e) {
        last_error = e.what();
        return LL_ERR_FORMAT;
    } catch (const InvariantError& e) {
        last_error = e.what();
        return LL_ERR_INVARIANT;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return LL_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return LL_ERR_INTERNAL;
    }
}

ll_status null_arg(const char* what) {
    last_error = std::string(what) + " must not be NULL";
    return LL_ERR_NULL;
}

EvalConfig to_cpp(const ll_eval_config* c) {
    EvalConfig e;
    if (!c) return e;
    e.target_abs_tol = c->target_abs_tol;
    e.rs_correction_terms = c->rs_correction_terms;
    e.fd_order = c->fd_order;
    e.rs_crossover = c->rs_crossover;
    e.fd_step_divisor = c->fd_step_divisor;
    e.fd_check_rel = c->fd_check_rel;
    e.validate();
    return e;
}

void from_integral(const IntegralResult& r, ll_integral* out) {
    out->value = r.value;
    out->abs_error_est = r.abs_error_est;
    out->evaluations = r.evaluations;
    out->converged = r.converged ? 1 : 0;
}

void copy_text(const std::string& s, char* buf, std::size_t len) {
    if (!buf || len == 0) return;
    const std::size_t n = std::min(s.size(), len - 1);
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
}

enum class Fn {
    ramachandra,
    product,
    short_interval,
    iterated,
    squared,
    first_power,
    fourth_power,
    arg_moment,
    s1_moment,
    signal_product,
    signal_fourth,
    signal_arg,
    signal_s1
};

struct FnEntry {
    const char* name;
    Fn fn;
    Regime regime;
};

const std::vector<FnEntry>& fn_table() {
    static const std::vector<FnEntry> t{
        {"ramachandra", Fn::ramachandra, Regime::short_range},
        {"product", Fn::product, Regime::macroscopic},
        {"short-interval", Fn::short_interval, Regime::short_range},
        {"theorem1", Fn::short_interval, Regime::short_range},
        {"iterated", Fn::iterated, Regime::macroscopic},
        {"theorem2", Fn::iterated, Regime::macroscopic},
        {"squared", Fn::squared, Regime::macroscopic},
        {"corollary", Fn::squared, Regime::macroscopic},
        {"first-power", Fn::first_power, Regime::macroscopic},
        {"fourth-power", Fn::fourth_power, Regime::seven_eighths},
        {"arg-moment", Fn::arg_moment, Regime::half_plus},
        {"s1-moment", Fn::s1_moment, Regime::half_plus},
        {"signal-product", Fn::signal_product, Regime::macroscopic},
        {"signal-fourth", Fn::signal_fourth, Regime::seven_eighths},
        {"signal-arg", Fn::signal_arg, Regime::half_plus},
        {"signal-s1", Fn::signal_s1, Regime::half_plus},
    };
    return t;
}

const FnEntry& lookup(const char* name) {
    if (!name) throw DomainError("functional name must not be NULL");
    for (const auto& e : fn_table()) {
        if (std::strcmp(e.name, name) == 0) return e;
    }
    std::string known;
    for (const auto& e : fn_table()) known += std::string(known.empty() ? "" : ", ") + e.name;
    throw DomainError(std::string("unknown functional '") + name + "' (known: " + known + ")");
}

IntervalSpec to_spec(const ll_interval* s, Regime regime) {
    IntervalSpec spec;
    spec.T = s->T;
    spec.U = s->U;
    spec.regime = regime;
    spec.epsilon = s->epsilon;
    spec.c_exp = s->c_exp;
    return spec;
}

SignalParams to_params(const ll_signal* s) {
    SignalParams p;
    if (s) {
        p.r = s->r;
        p.n = s->n;
        p.m = s->m;
        p.l = s->l;
    }
    p.validate();
    return p;
}

double shape(Fn fn, const IntervalSpec& spec, const SignalParams& p) {
    const double U = spec.U;
    const double L = std::log(spec.T);
    const double lu = U > 1.0 ? std::log(U) : 0.0;
    const double pm = std::ldexp(1.0, p.m);
    switch (fn) {
        case Fn::ramachandra: return U * std::pow(lu, p.r + 0.25);
        case Fn::product:
        case Fn::first_power:
        case Fn::s1_moment: return U * std::pow(L, p.n + 1);
        case Fn::short_interval: return U * std::pow(lu, p.r + 0.25) * L;
        case Fn::iterated: return U * std::pow(lu, p.r + 0.25) * std::pow(L, p.n + 1);
        case Fn::squared: return U * std::pow(lu, pm * (p.r + 0.25)) * std::pow(L, pm * (p.n + 1));
        case Fn::fourth_power:
            return U * std::pow(L, p.n + 5) / (2.0 * std::numbers::pi * std::numbers::pi);
        case Fn::arg_moment: return moment_coefficient(p.l).value() * U * std::pow(L, p.n + 1) * std::pow(std::log(L), p.l);
        case Fn::signal_product:
        case Fn::signal_s1: return U * std::pow(L, pm * (p.n + 1));
        case Fn::signal_fourth: return U * std::pow(L, pm * (p.n + 5));
        case Fn::signal_arg: return U * std::pow(L, pm * (p.n + 1)) * std::pow(std::log(L), p.l * pm);
    }
    return 0.0;
}

IntegralResult evaluate(const Functionals& f, Fn fn, const IntervalSpec& spec, const SignalParams& p) {
    using Kind = Functionals::RemarkKind;
    switch (fn) {
        case Fn::ramachandra: return f.ramachandra_lhs(spec, p.r);
        case Fn::product: return f.product_energy(spec, p.n);
        case Fn::short_interval: return f.theorem1_lhs(spec, p.r);
        case Fn::iterated: return f.theorem2_lhs(spec, p.r, p.n);
        case Fn::squared: return f.corollary_lhs(spec, p.r, p.n, p.m);
        case Fn::first_power: return f.first_power_product(spec, p.n);
        case Fn::fourth_power: return f.fourth_power_energy(spec, p.n);
        case Fn::arg_moment: return f.arg_moment(spec, p.n, p.l);
        case Fn::s1_moment: return f.s1_moment(spec, p.n, p.l);
        case Fn::signal_product: return f.remark_lhs(Kind::product, spec, p.n, p.m, p.l);
        case Fn::signal_fourth: return f.remark_lhs(Kind::fourth, spec, p.n, p.m, p.l);
        case Fn::signal_arg: return f.remark_lhs(Kind::arg, spec, p.n, p.m, p.l);
        case Fn::signal_s1: return f.remark_lhs(Kind::s1, spec, p.n, p.m, p.l);
    }
    return {};
}

}  // namespace

extern "C" {

const char* ll_last_error(void) { return last_error.c_str(); }

const char* ll_status_name(ll_status status) {
    switch (status) {
        case LL_OK: return "ok";
        case LL_ERR_DOMAIN: return "domain error";
        case LL_ERR_CONVERGENCE: return "no convergence";
        case LL_ERR_AMBIGUITY: return "ambiguous zero structure";
        case LL_ERR_REGIME: return "regime error";
        case LL_ERR_FORMAT: return "format error";
        case LL_ERR_INVARIANT: return "invariant violated";
        case LL_ERR_NULL: return "null argument";
        case LL_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* ll_version(void) { return "0.1.0"; }

void ll_eval_config_default(ll_eval_config* cfg) {
    if (!cfg) return;
    const EvalConfig e;
    cfg->target_abs_tol = e.target_abs_tol;
    cfg->rs_correction_terms = e.rs_correction_terms;
    cfg->fd_order = e.fd_order;
    cfg->rs_crossover = e.rs_crossover;
    cfg->fd_step_divisor = e.fd_step_divisor;
    cfg->fd_check_rel = e.fd_check_rel;
}

ll_status ll_theta(double t, const ll_eval_config* cfg, double* out) {
    if (!out) return null_arg("out");
    return guarded([&] { *out = theta(t, to_cpp(cfg)); });
}

ll_status ll_hardy_z(double t, const ll_eval_config* cfg, double* out) {
    if (!out) return null_arg("out");
    return guarded([&] { *out = hardy_z(t, to_cpp(cfg)); });
}

ll_status ll_zeta_derivative_abs(double t, int r, const ll_eval_config* cfg, double* out) {
    if (!out) return null_arg("out");
    return guarded([&] { *out = zeta_derivative_abs(t, r, to_cpp(cfg)); });
}

ll_status ll_zero_count(double t, const ll_eval_config* cfg, long* out) {
    if (!out) return null_arg("out");
    return guarded([&] { *out = zero_count(t, to_cpp(cfg)); });
}

ll_status ll_s_of_t(double t, const ll_eval_config* cfg, double* out) {
    if (!out) return null_arg("out");
    return guarded([&] { *out = s_of_t(t, to_cpp(cfg)); });
}

ll_status ll_s1_of_t(double t, const ll_eval_config* cfg, ll_integral* out) {
    if (!out) return null_arg("out");
    return guarded([&] { from_integral(s1_of_t(t, to_cpp(cfg)), out); });
}

void ll_ladder_options_default(ll_ladder_options* opts) {
    if (!opts) return;
    const LadderOptions o;
    opts->t_start = o.t_start;
    opts->t_end = o.t_end;
    opts->step = o.step;
    opts->solve_tol = o.solve_tol;
    opts->tail_eps = o.tail_eps;
    opts->jobs = o.jobs;
    opts->cache_dir = nullptr;
    ll_eval_config_default(&opts->eval);
}

ll_status ll_table_build(const ll_ladder_options* opts, ll_table** out) {
    if (!opts) return null_arg("opts");
    if (!out) return null_arg("out");
    return guarded([&] {
        LadderOptions o;
        o.t_start = opts->t_start;
        o.t_end = opts->t_end;
        o.step = opts->step;
        o.solve_tol = opts->solve_tol;
        o.tail_eps = opts->tail_eps;
        o.jobs = opts->jobs;
        o.cache_dir = (opts->cache_dir && *opts->cache_dir) ? opts->cache_dir : default_cache_dir();
        o.eval = to_cpp(&opts->eval);
        const Ladder ladder(o);
        auto t = std::make_unique<ll_table>();
        t->table = ladder.build_table();
        *out = t.release();
    });
}

ll_status ll_table_load(const char* path, const char* cache_dir, ll_table** out) {
    if (!path) return null_arg("path");
    if (!out) return null_arg("out");
    return guarded([&] {
        auto t = std::make_unique<ll_table>();
        t->table = LadderTable::load(path, (cache_dir && *cache_dir) ? cache_dir : default_cache_dir());
        *out = t.release();
    });
}

ll_status ll_table_save(const ll_table* table, const char* path) {
    if (!table) return null_arg("table");
    if (!path) return null_arg("path");
    return guarded([&] { table->table.save(path); });
}

void ll_table_free(ll_table* table) { delete table; }

ll_status ll_table_get_info(const ll_table* table, ll_table_info* out) {
    if (!table) return null_arg("table");
    if (!out) return null_arg("out");
    return guarded([&] {
        const auto& t = table->table;
        out->rows = t.size();
        out->t_front = t.size() ? t.front() : 0.0;
        out->t_back = t.size() ? t.back() : 0.0;
        out->step = t.step;
        out->solve_tol = t.solve_tol;
        out->partial = t.partial ? 1 : 0;
        out->failures = t.failures.size();
        out->kernel_evaluations = t.provenance.kernel_evaluations;
        out->build_seconds = t.provenance.build_seconds;
    });
}

ll_status ll_table_row(const ll_table* table, size_t i, double* t, double* phi1, double* energy, double* slope) {
    if (!table) return null_arg("table");
    return guarded([&] {
        const auto& tab = table->table;
        if (i >= tab.size()) throw DomainError("row index " + std::to_string(i) + " out of range");
        if (t) *t = tab.t[i];
        if (phi1) *phi1 = tab.phi1[i];
        if (energy) *energy = tab.energy[i];
        if (slope) *slope = tab.slope[i];
    });
}

ll_status ll_table_failure(const ll_table* table, size_t i, double* t, const char** message) {
    if (!table) return null_arg("table");
    return guarded([&] {
        const auto& f = table->table.failures;
        if (i >= f.size()) throw DomainError("failure index " + std::to_string(i) + " out of range");
        if (t) *t = f[i].t;
        if (message) *message = f[i].message.c_str();
    });
}

ll_status ll_phi1(const ll_table* table, double t, double* out) {
    if (!table) return null_arg("table");
    if (!out) return null_arg("out");
    return guarded([&] { *out = eval_phi1(table->table, t); });
}

ll_status ll_iterate(const ll_table* table, double t, int k, double* out) {
    if (!table) return null_arg("table");
    if (!out) return null_arg("out");
    return guarded([&] { *out = eval_iterate(table->table, t, k); });
}

ll_status ll_phi1_inverse(const ll_table* table, double y, double* out) {
    if (!table) return null_arg("table");
    if (!out) return null_arg("out");
    return guarded([&] { *out = phi1_inverse(table->table, y); });
}

ll_status ll_preimage_interval(const ll_table* table, double T, double U, double* a, double* b) {
    if (!table) return null_arg("table");
    if (!a || !b) return null_arg("a, b");
    return guarded([&] {
        const auto [x, y] = preimage_interval(table->table, T, U);
        *a = x;
        *b = y;
    });
}

ll_status ll_table_energy(const ll_table* table, double t, double* out) {
    if (!table) return null_arg("table");
    if (!out) return null_arg("out");
    return guarded([&] { *out = table_energy(table->table, t); });
}

void ll_functional_options_default(ll_functional_options* opts) {
    if (!opts) return;
    const FunctionalOptions f;
    ll_eval_config_default(&opts->eval);
    opts->points_per_oscillation = f.policy.points_per_oscillation;
    opts->max_depth = f.policy.max_depth;
    opts->rule_order = f.policy.rule_order;
    opts->rel_tol = f.rel_tol;
    opts->sign_samples = f.sign_samples;
}

ll_status ll_context_create(const ll_table* table, const ll_functional_options* opts, ll_context** out) {
    if (!table) return null_arg("table");
    if (!out) return null_arg("out");
    return guarded([&] {
        FunctionalOptions f;
        if (opts) {
            f.eval = to_cpp(&opts->eval);
            f.policy.points_per_oscillation = opts->points_per_oscillation;
            f.policy.max_depth = opts->max_depth;
            f.policy.rule_order = opts->rule_order;
            f.rel_tol = opts->rel_tol;
            f.sign_samples = opts->sign_samples;
        }
        auto c = std::make_unique<ll_context>();
        c->fun = std::make_unique<Functionals>(table->table, f);
        *out = c.release();
    });
}

void ll_context_free(ll_context* ctx) { delete ctx; }

const char* const* ll_functional_names(void) {
    static const std::vector<const char*> names = [] {
        std::vector<const char*> v;
        for (const auto& e : fn_table()) v.push_back(e.name);
        v.push_back(nullptr);
        return v;
    }();
    return names.data();
}

ll_status ll_functional(const ll_context* ctx, const char* name, const ll_interval* spec, const ll_signal* sig,
                        ll_integral* out) {
    if (!ctx) return null_arg("ctx");
    if (!spec) return null_arg("spec");
    if (!out) return null_arg("out");
    return guarded([&] {
        const auto& e = lookup(name);
        from_integral(evaluate(*ctx->fun, e.fn, to_spec(spec, e.regime), to_params(sig)), out);
    });
}

ll_status ll_functional_shape(const char* name, const ll_interval* spec, const ll_signal* sig, double* out) {
    if (!spec) return null_arg("spec");
    if (!out) return null_arg("out");
    return guarded([&] {
        const auto& e = lookup(name);
        *out = shape(e.fn, to_spec(spec, e.regime), to_params(sig));
    });
}

ll_status ll_functional_range(const char* name, const ll_interval* spec, double* lo, double* hi, char* text,
                              size_t text_len) {
    if (!spec) return null_arg("spec");
    return guarded([&] {
        const auto& e = lookup(name);
        IntervalSpec s = to_spec(spec, e.regime);
        std::pair<double, double> r;
        std::string txt;
        if (e.fn == Fn::signal_fourth) {
            const double u = std::pow(s.T, 7.0 / 8.0 + 2.0 * s.epsilon);
            r = {u, u};
            txt = "U = T^{7/8+2ε}";
        } else if (e.fn == Fn::product) {
            r = {0.0, std::numeric_limits<double>::infinity()};
            txt = "any U >= 0";
        } else {
            r = s.range();
            txt = s.range_text();
        }
        if (lo) *lo = r.first;
        if (hi) *hi = r.second;
        copy_text(txt, text, text_len);
    });
}

ll_status ll_weighted_product_energy(const ll_context* ctx, ll_weight_fn F, void* user, const ll_interval* spec,
                                     int n, ll_integral* out, int* sign_warning) {
    if (!ctx) return null_arg("ctx");
    if (!F) return null_arg("F");
    if (!spec) return null_arg("spec");
    if (!out) return null_arg("out");
    return guarded([&] {
        const auto w = ctx->fun->weighted_product_energy([&](double t) { return F(t, user); },
                                                         to_spec(spec, Regime::macroscopic), n);
        from_integral(w.result, out);
        if (sign_warning) *sign_warning = w.sign_warning ? 1 : 0;
        if (w.sign_warning) last_error = w.warning;
    });
}

ll_status ll_moment_coefficient(int l, char* text, size_t text_len, double* value) {
    return guarded([&] {
        const auto q = moment_coefficient(l);
        copy_text(q.str(), text, text_len);
        if (value) *value = q.value();
    });
}

ll_status ll_config_new(ll_config** out) {
    if (!out) return null_arg("out");
    return guarded([&] { *out = new ll_config{}; });
}

ll_status ll_config_parse(const char* text, ll_config** out) {
    if (!text) return null_arg("text");
    if (!out) return null_arg("out");
    return guarded([&] { *out = new ll_config{RunConfig::parse(text)}; });
}

ll_status ll_config_load(const char* path, ll_config** out) {
    if (!path) return null_arg("path");
    if (!out) return null_arg("out");
    return guarded([&] { *out = new ll_config{RunConfig::load(path)}; });
}

ll_status ll_config_set(ll_config* cfg, const char* key, const char* value) {
    if (!cfg) return null_arg("cfg");
    if (!key || !value) return null_arg("key, value");
    return guarded([&] { cfg->cfg.set(key, value); });
}

ll_status ll_config_text(const ll_config* cfg, char* buf, size_t len, size_t* needed) {
    if (!cfg) return null_arg("cfg");
    return guarded([&] {
        const auto s = cfg->cfg.to_text();
        if (needed) *needed = s.size();
        copy_text(s, buf, len);
    });
}

ll_status ll_config_validate(const ll_config* cfg) {
    if (!cfg) return null_arg("cfg");
    return guarded([&] { cfg->cfg.validate(); });
}

void ll_config_free(ll_config* cfg) { delete cfg; }

const char* const* ll_claim_ids(void) {
    static const std::vector<const char*> ids = [] {
        std::vector<const char*> v;
        for (const auto& id : known_claims()) v.push_back(id.c_str());
        v.push_back(nullptr);
        return v;
    }();
    return ids.data();
}

ll_status ll_run_suite(const ll_config* cfg, const ll_table* table, ll_suite_summary* out) {
    if (!cfg) return null_arg("cfg");
    if (!out) return null_arg("out");
    return guarded([&] {
        const auto r = table ? run_suite(cfg->cfg, table->table) : run_suite(cfg->cfg);
        out->reports = static_cast<int>(r.reports.size());
        out->passed = r.passed;
        out->failed = r.failed;
        out->skipped = r.skipped;
        out->recorded = r.recorded;
    });
}

}  // extern "C"
