#include "ladderlab/verification.hpp"

#include "ladderlab/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace ladderlab {

namespace {

constexpr double kPi = std::numbers::pi;
// Cauchy-Schwarz rows compare two independently integrated values.
constexpr double kCauchySlack = 1e-6;

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out + "\"";
}

VerificationReport make(const std::string& claim, const std::string& variant, const IntervalSpec& spec,
                        SignalParams params) {
    VerificationReport r;
    r.claim_id = claim;
    r.variant = variant;
    r.spec = spec;
    r.params = params;
    return r;
}

// Runs body, stores wall time, turns refusals into skips and other errors
// into failures with the message as reason.
void measure(VerificationReport& r, const std::function<void(VerificationReport&)>& body) {
    const auto t0 = Clock::now();
    try {
        body(r);
    } catch (const RegimeError& e) {
        r.status = Status::skip;
        r.reason = e.what();
    } catch (const ConvergenceError& e) {
        r.status = Status::fail;
        r.converged = false;
        r.reason = e.what();
    } catch (const std::exception& e) {
        r.status = Status::fail;
        r.reason = e.what();
    }
    r.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
}

void add(VerificationReport& r, const IntegralResult& x) {
    r.evaluations += x.evaluations;
    r.converged = r.converged && x.converged;
}

template <typename Task>
void parallel_for(std::size_t count, int jobs, const Task& task) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto n = std::min<std::size_t>(count, static_cast<std::size_t>(jobs));
    for (std::size_t w = 0; w < n; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

const char* status_name(Status s) {
    switch (s) {
        case Status::pass: return "pass";
        case Status::fail: return "fail";
        case Status::skip: return "skip";
        case Status::recorded: return "recorded";
    }
    return "?";
}

Verifier::Verifier(const LadderTable& table, const RunConfig& cfg)
    : table_(table), cfg_(cfg), fun_(table, FunctionalOptions{cfg.eval, cfg.policy, cfg.rel_tol, 32}) {}

std::pair<double, double> Verifier::band_for(const std::string& claim, std::pair<double, double> fallback) const {
    const auto it = cfg_.bands.find(claim);
    return it == cfg_.bands.end() ? fallback : it->second;
}

// Fills ratio and status for a computed row. A row with status already set
// (skip or an error) is left alone; "recorded" rows keep no band.
void Verifier::finish(VerificationReport& r) const {
    if (r.status == Status::skip || (r.status == Status::fail && !r.reason.empty())) return;
    r.ratio = r.lhs / r.rhs_scale;
    if (r.empirical_constant == 0.0) r.empirical_constant = r.ratio;
    if (r.status == Status::recorded) return;
    r.status = (r.ratio >= r.band_lo && r.ratio <= r.band_hi) ? Status::pass : Status::fail;
}

// Rows of one claim sharing (variant, r, n, m, l) form a group whose
// empirical constants must be positive with max/min <= spread_max. In ratio
// space (ratio = constant^power) that is the band [max / s, min * s] with
// s = spread_max^power, so every row passes exactly when the group does.
void Verifier::apply_stability(std::vector<VerificationReport>& rows, int power) const {
    std::map<std::string, std::vector<VerificationReport*>> groups;
    for (auto& r : rows) {
        if (r.status == Status::skip || !r.reason.empty() || r.variant == "cauchy") continue;
        const auto key = r.variant + "|" + std::to_string(r.params.r) + "|" + std::to_string(r.params.n) + "|" +
                         std::to_string(r.params.m) + "|" + std::to_string(r.params.l);
        groups[key].push_back(&r);
    }
    const double s = std::pow(cfg_.spread_max, power);
    for (auto& [key, members] : groups) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto* r : members) {
            const double ratio = r->lhs / r->rhs_scale;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        for (auto* r : members) {
            const auto over = cfg_.bands.find(r->claim_id);
            if (over != cfg_.bands.end()) {
                r->band_lo = over->second.first;
                r->band_hi = over->second.second;
            } else {
                r->band_lo = std::max(hi / s, std::numeric_limits<double>::min());
                r->band_hi = lo * s;
            }
            r->status = Status::pass;
            if (power > 1) r->empirical_constant = std::pow(r->lhs / r->rhs_scale, 1.0 / power);
            finish(*r);
        }
    }
}

std::vector<VerificationReport> Verifier::density(const std::vector<std::pair<double, double>>& pairs) const {
    std::vector<VerificationReport> out;
    const auto band = band_for("density", {0.95, 1.05});
    for (const auto& [T, U] : pairs) {
        auto r = make("density", "", IntervalSpec{T, U, Regime::short_range, cfg_.epsilon, cfg_.c_exp}, {});
        r.band_lo = band.first;
        r.band_hi = band.second;
        if (U == 0.0) {
            r.status = Status::skip;
            r.reason = "U = 0: the relative deviation is 0/0";
            out.push_back(r);
            continue;
        }
        r.status = Status::pass;
        measure(r, [&](VerificationReport& x) {
            x.lhs = (eval_phi1(table_, T + U) - eval_phi1(table_, T)) * std::log(T);
            x.rhs_scale = table_energy(table_, T + U) - table_energy(table_, T);
        });
        finish(r);
        out.push_back(r);
    }
    return out;
}

std::vector<VerificationReport> Verifier::product(double T, const std::vector<int>& n_list) const {
    std::vector<VerificationReport> out;
    const auto spec = IntervalSpec::at_upper(T, Regime::macroscopic, cfg_.epsilon, cfg_.c_exp);
    for (int n : n_list) {
        auto r = make("product", "", spec, {0, n, 1, 1});
        const auto band = band_for("product", n <= 1 ? std::pair{0.8, 1.25} : std::pair{0.7, 1.4});
        r.band_lo = band.first;
        r.band_hi = band.second;
        r.status = Status::pass;
        measure(r, [&](VerificationReport& x) {
            const auto lhs = fun_.product_energy(spec, n);
            add(x, lhs);
            x.lhs = lhs.value;
            // U times the mean of Z^2 over each iterated image interval.
            double scale = spec.U;
            for (int k = 0; k <= n; ++k) {
                const double a = eval_iterate(table_, spec.T, k);
                const double b = eval_iterate(table_, spec.T + spec.U, k);
                scale *= (table_energy(table_, b) - table_energy(table_, a)) / (b - a);
            }
            x.rhs_scale = scale;
        });
        finish(r);
        out.push_back(r);
    }
    return out;
}

std::vector<VerificationReport> Verifier::weighted(double T) const {
    const auto spec = IntervalSpec::at_upper(T, Regime::macroscopic, cfg_.epsilon, cfg_.c_exp);
    auto r = make("weighted", "abs-zeta", spec, {0, 0, 1, 1});
    const auto band = band_for("weighted", {0.75, 1.25});
    r.band_lo = band.first;
    r.band_hi = band.second;
    r.status = Status::pass;
    measure(r, [&](VerificationReport& x) {
        auto F = [&](double t) { return std::abs(hardy_z(t, cfg_.eval)); };
        const auto w = fun_.weighted_product_energy(F, spec, 0);
        add(x, w.result);
        x.lhs = w.result.value;
        if (w.sign_warning) x.reason = w.warning;
        const double a = eval_phi1(table_, spec.T);
        const double b = eval_phi1(table_, spec.T + spec.U);
        std::vector<double> bps{a};
        for (double g : fun_.zeros().zeros_between(a, b)) {
            if (g > a && g < b) bps.push_back(g);
        }
        bps.push_back(b);
        const auto inner = integrate_pieces_relative(F, bps, cfg_.rel_tol, cfg_.policy);
        add(x, inner);
        x.rhs_scale = inner.value * std::log(spec.T);
    });
    finish(r);
    return {r};
}

std::vector<VerificationReport> Verifier::transfer(double T, double U, const std::vector<int>& r_list) const {
    std::vector<VerificationReport> out;
    const IntervalSpec spec{T, U, Regime::short_range, cfg_.epsilon, cfg_.c_exp};
    const auto band = band_for("transfer", {0.9, 1.1});
    for (int rr : r_list) {
        auto r = make("transfer", "", spec, {rr, 0, 1, 1});
        r.band_lo = band.first;
        r.band_hi = band.second;
        r.status = Status::pass;
        measure(r, [&](VerificationReport& x) {
            const auto a = fun_.theorem1_lhs(spec, rr);
            const auto b = fun_.ramachandra_lhs(spec, rr);
            add(x, a);
            add(x, b);
            x.lhs = a.value;
            x.rhs_scale = std::log(T) * b.value;
        });
        finish(r);
        out.push_back(r);
    }
    return out;
}

std::vector<VerificationReport> Verifier::increment(double T, const std::vector<int>& n_list) const {
    std::vector<VerificationReport> out;
    const double L = std::log(T);
    const auto band = band_for("increment", {0.95, 1.05});
    struct Case {
        const char* variant;
        double U;
        bool asserted;
    };
    const std::vector<Case> cases{
        {"", std::pow(T, 0.4), true},
        {"", T / (L * L), true},
        {"trend", std::pow(T, 1.0 / 3.0 + 2.0 * cfg_.epsilon), false},
        {"trend", std::pow(T, 0.45), false},
        {"trend", std::pow(T, 0.5), false},
        {"below-range", std::pow(T, 0.3), false},
    };
    for (int n : n_list) {
        for (const auto& c : cases) {
            const IntervalSpec spec{T, c.U, Regime::macroscopic, cfg_.epsilon, cfg_.c_exp};
            auto r = make("increment", c.variant, spec, {0, n, 1, 1});
            if (c.asserted) {
                r.band_lo = band.first;
                r.band_hi = band.second;
                r.status = Status::pass;
            }
            measure(r, [&](VerificationReport& x) {
                spec.check();
                x.lhs = eval_iterate(table_, T + c.U, n + 1) - eval_iterate(table_, T, n + 1);
                x.rhs_scale = c.U;
            });
            finish(r);
            out.push_back(r);
        }
    }
    return out;
}

std::vector<VerificationReport> Verifier::short_interval() const {
    std::vector<VerificationReport> out;
    for (int rr : {0, 1}) {
        for (double T : cfg_.stability_T) {
            const IntervalSpec spec{T, cfg_.short_U, Regime::short_range, cfg_.epsilon, cfg_.c_exp};
            auto r = make("short-interval", "", spec, {rr, 0, 1, 1});
            measure(r, [&](VerificationReport& x) {
                const auto v = fun_.theorem1_lhs(spec, rr);
                add(x, v);
                x.lhs = v.value;
                x.rhs_scale = spec.U * std::pow(std::log(spec.U), rr + 0.25) * std::log(T);
            });
            out.push_back(r);
        }
    }
    apply_stability(out, 1);
    return out;
}

std::vector<VerificationReport> Verifier::iterated() const {
    std::vector<VerificationReport> out;
    for (int rr : {0, 1}) {
        for (int n : {0, 1}) {
            for (double T : cfg_.stability_T) {
                const auto spec = IntervalSpec::at_upper(T, Regime::macroscopic, cfg_.epsilon, cfg_.c_exp);
                auto r = make("iterated", "", spec, {rr, n, 1, 1});
                measure(r, [&](VerificationReport& x) {
                    const auto v = fun_.theorem2_lhs(spec, rr, n);
                    add(x, v);
                    x.lhs = v.value;
                    x.rhs_scale = spec.U * std::pow(std::log(spec.U), rr + 0.25) * std::pow(std::log(T), n + 1);
                });
                out.push_back(r);
            }
        }
    }
    apply_stability(out, 1);
    return out;
}

std::vector<VerificationReport> Verifier::squared() const {
    std::vector<VerificationReport> out;
    std::vector<VerificationReport> cauchy;
    const int m = 1;
    const double p = std::ldexp(1.0, m);
    for (int rr : {0, 1}) {
        for (int n : {0, 1}) {
            for (double T : cfg_.stability_T) {
                const auto spec = IntervalSpec::at_upper(T, Regime::macroscopic, cfg_.epsilon, cfg_.c_exp);
                auto r = make("squared", "", spec, {rr, n, m, 1});
                auto c = make("squared", "cauchy", spec, {rr, n, m, 1});
                c.band_lo = 0.0;
                c.band_hi = 1.0 + kCauchySlack;
                c.status = Status::pass;
                double sq = 0.0;
                measure(r, [&](VerificationReport& x) {
                    const auto v = fun_.corollary_lhs(spec, rr, n, m);
                    add(x, v);
                    x.lhs = v.value;
                    sq = v.value;
                    x.rhs_scale = spec.U * std::pow(std::log(spec.U), p * (rr + 0.25)) *
                                  std::pow(std::log(T), p * (n + 1));
                });
                measure(c, [&](VerificationReport& x) {
                    if (!r.reason.empty()) throw DomainError("squared integral unavailable: " + r.reason);
                    const auto v = fun_.theorem2_lhs(spec, rr, n);
                    add(x, v);
                    x.lhs = v.value * v.value;
                    x.rhs_scale = spec.U * sq;
                });
                finish(c);
                out.push_back(r);
                cauchy.push_back(c);
            }
        }
    }
    apply_stability(out, 2);
    out.insert(out.end(), cauchy.begin(), cauchy.end());
    return out;
}

std::vector<VerificationReport> Verifier::first_power(double T) const {
    std::vector<VerificationReport> out;
    const auto spec = IntervalSpec::at_upper(T, Regime::macroscopic, cfg_.epsilon, cfg_.c_exp);
    for (int n : {0, 1}) {
        const double scale = spec.U * std::pow(std::log(T), n + 1);
        auto a = make("first-power", "first-power", spec, {0, n, 1, 1});
        measure(a, [&](VerificationReport& x) {
            const auto v = fun_.first_power_product(spec, n);
            add(x, v);
            x.lhs = v.value;
            x.rhs_scale = scale;
        });
        finish(a);
        out.push_back(a);
        auto b = make("first-power", "squared-reading", spec, {0, n, 1, 1});
        measure(b, [&](VerificationReport& x) {
            const auto v = fun_.product_energy(spec, n);
            add(x, v);
            x.lhs = v.value;
            x.rhs_scale = scale;
        });
        finish(b);
        out.push_back(b);
    }
    return out;
}

std::vector<VerificationReport> Verifier::fourth_power(double T) const {
    const auto spec = IntervalSpec::at_upper(T, Regime::seven_eighths, cfg_.epsilon, cfg_.c_exp);
    auto r = make("fourth-power", "", spec, {0, 0, 1, 1});
    const auto band = band_for("fourth-power", {1.0 / 3.0, 3.0});
    r.band_lo = band.first;
    r.band_hi = band.second;
    r.status = Status::pass;
    measure(r, [&](VerificationReport& x) {
        const auto v = fun_.fourth_power_energy(spec, 0);
        add(x, v);
        x.lhs = v.value;
        const double shape = spec.U * std::pow(std::log(T), 5);
        x.rhs_scale = shape / (2.0 * kPi * kPi);
        x.empirical_constant = v.value / shape;
    });
    finish(r);
    return {r};
}

std::vector<VerificationReport> Verifier::arg_moment(double T) const {
    const auto spec = IntervalSpec::at_upper(T, Regime::half_plus, cfg_.epsilon, cfg_.c_exp);
    const int l = 1;
    auto r = make("arg-moment", "", spec, {0, 0, 1, l});
    const auto band = band_for("arg-moment", {1.0 / 3.0, 3.0});
    r.band_lo = band.first;
    r.band_hi = band.second;
    r.status = Status::pass;
    measure(r, [&](VerificationReport& x) {
        const auto v = fun_.arg_moment(spec, 0, l);
        add(x, v);
        x.lhs = v.value;
        const double L = std::log(T);
        const double shape = spec.U * L * std::pow(std::log(L), l);
        x.rhs_scale = moment_coefficient(l).value() * shape;
        x.empirical_constant = v.value / shape;
    });
    finish(r);
    return {r};
}

std::vector<VerificationReport> Verifier::s1_moment(double T) const {
    const auto spec = IntervalSpec::at_upper(T, Regime::half_plus, cfg_.epsilon, cfg_.c_exp);
    auto r = make("s1-moment", "", spec, {0, 0, 1, 1});
    measure(r, [&](VerificationReport& x) {
        const auto v = fun_.s1_moment(spec, 0, 1);
        add(x, v);
        x.lhs = v.value;
        x.rhs_scale = spec.U * std::log(T);
    });
    finish(r);
    return {r};
}

std::vector<VerificationReport> Verifier::signal_energies() const {
    using Kind = Functionals::RemarkKind;
    std::vector<VerificationReport> out;
    const int n = 0;
    const int m = 1;
    const int l = 1;
    const double p = std::ldexp(1.0, m);
    struct Case {
        Kind kind;
        const char* variant;
    };
    for (const auto& c : {Case{Kind::product, "product"}, Case{Kind::fourth, "fourth"}, Case{Kind::arg, "arg"},
                          Case{Kind::s1, "s1"}}) {
        for (double T : cfg_.stability_T) {
            const double L = std::log(T);
            IntervalSpec spec;
            switch (c.kind) {
                case Kind::product:
                    spec = IntervalSpec::at_upper(T, Regime::macroscopic, cfg_.epsilon, cfg_.c_exp);
                    break;
                case Kind::fourth:
                    spec = IntervalSpec{T, std::pow(T, 7.0 / 8.0 + 2.0 * cfg_.epsilon), Regime::seven_eighths,
                                        cfg_.epsilon, cfg_.c_exp};
                    break;
                default: spec = IntervalSpec::at_upper(T, Regime::half_plus, cfg_.epsilon, cfg_.c_exp); break;
            }
            auto r = make("signal-energies", c.variant, spec, {0, n, m, l});
            measure(r, [&](VerificationReport& x) {
                const auto v = fun_.remark_lhs(c.kind, spec, n, m, l);
                add(x, v);
                x.lhs = v.value;
                double scale = spec.U * std::pow(L, p * (n + 1));
                if (c.kind == Kind::fourth) scale = spec.U * std::pow(L, p * (n + 5));
                if (c.kind == Kind::arg) scale *= std::pow(std::log(L), l * p);
                x.rhs_scale = scale;
            });
            out.push_back(r);
        }
    }
    apply_stability(out, 2);
    return out;
}

std::vector<VerificationReport> Verifier::run_claim(const std::string& id) const {
    if (id == "density") return density(cfg_.density_pairs);
    if (id == "product") return product(cfg_.T, {0, 1, 2});
    if (id == "weighted") return weighted(cfg_.T);
    if (id == "transfer") return transfer(cfg_.T, cfg_.short_U, {0, 1});
    if (id == "increment") return increment(cfg_.T, {0, 1});
    if (id == "short-interval") return short_interval();
    if (id == "iterated") return iterated();
    if (id == "squared") return squared();
    if (id == "first-power") return first_power(cfg_.T);
    if (id == "fourth-power") return fourth_power(cfg_.T);
    if (id == "arg-moment") return arg_moment(cfg_.T);
    if (id == "s1-moment") return s1_moment(cfg_.T);
    if (id == "signal-energies") return signal_energies();
    throw DomainError("unknown claim id '" + id + "'");
}

std::pair<double, double> required_table_range(const RunConfig& cfg) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    auto need = [&](double a, double b) {
        lo = std::min(lo, a);
        hi = std::max(hi, b);
    };
    auto macro_top = [&](double T) {
        const double L = std::log(T);
        return T + T / (L * L);
    };
    // Iterates fall by a factor of about 1 - 0.5 / ln T per step; three steps
    // stay above 0.75 T for every T this suite uses. Preimages rise by at most 6%.
    for (const auto& id : cfg.claims) {
        if (id == "density") {
            for (const auto& [T, U] : cfg.density_pairs) need(0.75 * T, T + U);
        } else if (id == "transfer") {
            need(0.75 * cfg.T, 1.06 * (cfg.T + cfg.short_U));
        } else if (id == "short-interval") {
            for (double T : cfg.stability_T) need(0.75 * T, 1.06 * (T + cfg.short_U));
        } else if (id == "iterated" || id == "squared") {
            for (double T : cfg.stability_T) need(0.75 * T, macro_top(T));
        } else if (id == "fourth-power") {
            need(0.75 * cfg.T, cfg.T + std::pow(cfg.T, 7.0 / 8.0 + cfg.epsilon));
        } else if (id == "signal-energies") {
            for (double T : cfg.stability_T) need(0.75 * T, T + std::pow(T, 7.0 / 8.0 + 2.0 * cfg.epsilon));
        } else {
            need(0.75 * cfg.T, macro_top(cfg.T));
        }
    }
    if (hi == 0.0) return {0.0, 0.0};
    const double step = cfg.step;
    const double a = std::max(100.0, std::floor(lo / step) * step);
    const double b = std::ceil(hi * 1.01 / step) * step + step;
    return {a, b};
}

SuiteResult run_suite(const RunConfig& cfg, const LadderTable& table) {
    cfg.validate();
    SuiteResult result;
    if (!cfg.claims.empty()) {
        const Verifier v(table, cfg);
        std::vector<std::vector<VerificationReport>> per_claim(cfg.claims.size());
        parallel_for(cfg.claims.size(), cfg.jobs,
                     [&](std::size_t i) { per_claim[i] = v.run_claim(cfg.claims[i]); });
        for (auto& rows : per_claim) result.reports.insert(result.reports.end(), rows.begin(), rows.end());
    }
    for (const auto& r : result.reports) {
        switch (r.status) {
            case Status::pass: ++result.passed; break;
            case Status::fail: ++result.failed; break;
            case Status::skip: ++result.skipped; break;
            case Status::recorded: ++result.recorded; break;
        }
    }
    result.files = write_bundle(result.reports, cfg);
    return result;
}

SuiteResult run_suite(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.claims.empty()) {
        SuiteResult result;
        result.files = write_bundle({}, cfg);
        return result;
    }
    const std::string cache = cfg.cache_dir.empty() ? default_cache_dir() : cfg.cache_dir;
    if (!cfg.table.empty()) {
        const auto table = LadderTable::load(cfg.table, cache);
        return run_suite(cfg, table);
    }
    LadderOptions opts;
    auto [a, b] = required_table_range(cfg);
    if (cfg.t_start > 0.0 || cfg.t_end > 0.0) {
        a = cfg.t_start;
        b = cfg.t_end;
    }
    opts.t_start = a;
    opts.t_end = b;
    opts.step = cfg.step;
    opts.solve_tol = cfg.solve_tol;
    opts.tail_eps = cfg.tail_eps;
    opts.jobs = cfg.jobs;
    opts.cache_dir = cache;
    opts.eval = cfg.eval;
    const Ladder ladder(opts);
    const auto table = ladder.build_table();
    return run_suite(cfg, table);
}

std::vector<std::string> write_bundle(const std::vector<VerificationReport>& reports, const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir / "plot");
    std::vector<std::string> files;
    auto open = [&](const std::string& name) {
        std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
        if (!f) throw FormatError("cannot write " + (dir / name).string());
        files.push_back(name);
        return f;
    };
    const bool delimited = cfg.format != "structured";
    const bool structured = cfg.format != "delimited";

    std::vector<std::string> claims;
    for (const auto& r : reports) {
        if (std::find(claims.begin(), claims.end(), r.claim_id) == claims.end()) claims.push_back(r.claim_id);
    }

    const char* header =
        "claim_id,variant,T,U,regime,epsilon,r,n,m,l,lhs,rhs_scale,ratio,empirical_constant,band_lo,band_hi,"
        "status,converged,evaluations,reason\n";
    auto csv_row = [](const VerificationReport& r) {
        std::ostringstream o;
        o << r.claim_id << ',' << r.variant << ',' << fmt(r.spec.T) << ',' << fmt(r.spec.U) << ','
          << regime_name(r.spec.regime) << ',' << fmt(r.spec.epsilon) << ',' << r.params.r << ',' << r.params.n
          << ',' << r.params.m << ',' << r.params.l << ',' << fmt(r.lhs) << ',' << fmt(r.rhs_scale) << ','
          << fmt(r.ratio) << ',' << fmt(r.empirical_constant) << ',' << fmt(r.band_lo) << ',' << fmt(r.band_hi)
          << ',' << status_name(r.status) << ',' << (r.converged ? "true" : "false") << ',' << r.evaluations << ','
          << csv_field(r.reason) << '\n';
        return o.str();
    };
    auto kv_block = [](const VerificationReport& r, std::size_t i) {
        std::ostringstream o;
        o << "[report " << i << "]\n"
          << "claim_id = " << r.claim_id << "\nvariant = " << r.variant << "\nT = " << fmt(r.spec.T)
          << "\nU = " << fmt(r.spec.U) << "\nregime = " << regime_name(r.spec.regime)
          << "\nepsilon = " << fmt(r.spec.epsilon) << "\nc_exp = " << fmt(r.spec.c_exp) << "\nr = " << r.params.r
          << "\nn = " << r.params.n << "\nm = " << r.params.m << "\nl = " << r.params.l << "\nlhs = " << fmt(r.lhs)
          << "\nrhs_scale = " << fmt(r.rhs_scale) << "\nratio = " << fmt(r.ratio)
          << "\nempirical_constant = " << fmt(r.empirical_constant) << "\nband = " << fmt(r.band_lo) << ","
          << fmt(r.band_hi) << "\nstatus = " << status_name(r.status)
          << "\nconverged = " << (r.converged ? "true" : "false") << "\nevaluations = " << r.evaluations
          << "\nreason = " << r.reason << "\n\n";
        return o.str();
    };

    int counts[4] = {0, 0, 0, 0};
    for (const auto& r : reports) ++counts[static_cast<int>(r.status)];
    {
        auto f = open("summary.txt");
        f << "# ladderlab verification summary\n";
        f << "reports = " << reports.size() << "\npass = " << counts[0] << "\nfail = " << counts[1]
          << "\nskip = " << counts[2] << "\nrecorded = " << counts[3] << "\n";
        f << "result = " << (counts[1] == 0 ? "ok" : "failed") << "\n\n";
        f << "# claim variant T U r n m l ratio band status\n";
        for (const auto& r : reports) {
            f << r.claim_id << ' ' << (r.variant.empty() ? "-" : r.variant) << ' ' << short_fmt(r.spec.T) << ' '
              << short_fmt(r.spec.U) << ' ' << r.params.r << ' ' << r.params.n << ' ' << r.params.m << ' '
              << r.params.l << ' ' << short_fmt(r.ratio) << " [" << short_fmt(r.band_lo) << ", "
              << short_fmt(r.band_hi) << "] " << status_name(r.status) << '\n';
        }
    }
    if (delimited) {
        auto f = open("summary.csv");
        f << header;
        for (const auto& r : reports) f << csv_row(r);
    }
    for (const auto& id : claims) {
        std::vector<const VerificationReport*> rows;
        for (const auto& r : reports) {
            if (r.claim_id == id) rows.push_back(&r);
        }
        if (delimited) {
            auto f = open(id + ".csv");
            f << header;
            for (const auto* r : rows) f << csv_row(*r);
        }
        if (structured) {
            auto f = open(id + ".kv");
            for (std::size_t i = 0; i < rows.size(); ++i) f << kv_block(*rows[i], i);
        }
        auto f = open("plot/" + id + ".dat");
        f << "# variant T U r n m l ratio deviation empirical_constant status\n";
        for (const auto* r : rows) {
            f << (r->variant.empty() ? "-" : r->variant) << ' ' << fmt(r->spec.T) << ' ' << fmt(r->spec.U) << ' '
              << r->params.r << ' ' << r->params.n << ' ' << r->params.m << ' ' << r->params.l << ' '
              << fmt(r->ratio) << ' ' << fmt(r->ratio - 1.0) << ' ' << fmt(r->empirical_constant) << ' '
              << status_name(r->status) << '\n';
        }
    }
    {
        // Wall-clock data lives apart from the reproducible files.
        std::ofstream f(dir / "timing.csv", std::ios::binary | std::ios::trunc);
        f << "claim_id,variant,T,U,r,n,m,l,runtime_s\n";
        for (const auto& r : reports) {
            f << r.claim_id << ',' << r.variant << ',' << fmt(r.spec.T) << ',' << fmt(r.spec.U) << ',' << r.params.r
              << ',' << r.params.n << ',' << r.params.m << ',' << r.params.l << ',' << fmt(r.runtime_s) << '\n';
        }
    }
    return files;
}

}  // namespace ladderlab
