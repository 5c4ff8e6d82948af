#include "ladderlab/functionals.hpp"

#include "ladderlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace ladderlab {

namespace {

constexpr double kPi = std::numbers::pi;
// |zeta| floor for log-space powers; zeros are a null set for the integrals.
constexpr double kLogFloor = 1e-300;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

IntegralResult zero_result() { return {0.0, 0.0, 0, true}; }

double log_abs(double v) { return std::log(std::max(std::abs(v), kLogFloor)); }

}  // namespace

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::short_range: return "short";
        case Regime::macroscopic: return "macroscopic";
        case Regime::half_plus: return "half_plus";
        case Regime::seven_eighths: return "seven_eighths";
    }
    return "?";
}

Regime regime_from_name(const std::string& name) {
    if (name == "short") return Regime::short_range;
    if (name == "macroscopic") return Regime::macroscopic;
    if (name == "half_plus") return Regime::half_plus;
    if (name == "seven_eighths") return Regime::seven_eighths;
    throw DomainError("unknown regime '" + name + "' (short, macroscopic, half_plus, seven_eighths)");
}

std::pair<double, double> IntervalSpec::range() const {
    if (!(T > std::numbers::e)) throw DomainError("IntervalSpec: T must exceed e");
    const double L = std::log(T);
    switch (regime) {
        case Regime::short_range: return {3.0 * std::pow(L, c_exp), T / L};
        case Regime::macroscopic: return {std::pow(T, 1.0 / 3.0 + 2.0 * epsilon), T / (L * L)};
        case Regime::half_plus: return {std::pow(T, 0.5 + epsilon), T / (L * L)};
        case Regime::seven_eighths: {
            const double u = std::pow(T, 7.0 / 8.0 + epsilon);
            return {u, u};
        }
    }
    return {0.0, 0.0};
}

std::string IntervalSpec::range_text() const {
    const auto [lo, hi] = range();
    switch (regime) {
        case Regime::short_range:
            return "U ∈ [3·ln^c T, T/ln T] = [" + num(lo) + ", " + num(hi) + "] (c = " + num(c_exp) + ")";
        case Regime::macroscopic:
            return "U ∈ [T^{1/3+2ε}, T/ln²T] = [" + num(lo) + ", " + num(hi) + "] (ε = " + num(epsilon) + ")";
        case Regime::half_plus:
            return "U ∈ [T^{1/2+ε}, T/ln²T] = [" + num(lo) + ", " + num(hi) + "] (ε = " + num(epsilon) + ")";
        case Regime::seven_eighths:
            return "U = T^{7/8+ε} = " + num(lo) + " (ε = " + num(epsilon) + ")";
    }
    return {};
}

void IntervalSpec::check() const {
    if (!(U >= 0.0)) throw DomainError("IntervalSpec: U must be >= 0");
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw DomainError("IntervalSpec: epsilon must lie in (0, 0.5)");
    if (!(c_exp > 0.0)) throw DomainError("IntervalSpec: c must be > 0");
    if (U == 0.0) return;
    const auto [lo, hi] = range();
    const std::string where = " at T = " + num(T) + ", U = " + num(U);
    if (regime == Regime::seven_eighths) {
        if (std::abs(U - lo) > 1e-9 * lo) throw RegimeError("outside regime: requires " + range_text() + where);
        return;
    }
    if (lo > hi) throw RegimeError("regime empty: " + range_text() + where);
    if (U < lo * (1.0 - 1e-12) || U > hi * (1.0 + 1e-12)) {
        throw RegimeError("outside regime: requires " + range_text() + where);
    }
}

IntervalSpec IntervalSpec::at_upper(double T, Regime regime, double epsilon, double c_exp) {
    IntervalSpec s{T, 0.0, regime, epsilon, c_exp};
    s.U = s.range().second;
    return s;
}

void SignalParams::validate() const {
    if (r < 0 || r > 4) throw DomainError("r must lie in [0, 4]");
    if (n < 0 || n > 3) throw DomainError("n must lie in [0, 3]");
    if (m < 0 || m > 2) throw DomainError("m must lie in [0, 2]");
    if (l < 1 || l > 3) throw DomainError("l must lie in [1, 3]");
}

std::string Rational::str() const {
    auto digits = [](unsigned __int128 v) {
        if (v == 0) return std::string("0");
        std::string s;
        while (v > 0) {
            s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
            v /= 10;
        }
        return s;
    };
    return den == 1 ? digits(num) : digits(num) + "/" + digits(den);
}

Rational moment_coefficient(int l) {
    if (l < 1 || l > 20) throw DomainError("moment_coefficient: l must lie in [1, 20]");
    // (2l)! / (l! 4^l) = prod_{j<=l} (2j - 1) / 2; the odd numerator is already coprime to 2^l.
    Rational q;
    q.num = 1;
    for (int j = 1; j <= l; ++j) q.num *= static_cast<unsigned>(2 * j - 1);
    q.den = std::uint64_t{1} << l;
    return q;
}

// ---------------------------------------------------------------------------

Functionals::Functionals(const LadderTable& table, FunctionalOptions opts) : table_(table), opts_(std::move(opts)) {
    opts_.eval.validate();
    opts_.policy.validate();
    if (!(opts_.rel_tol > 0.0)) throw DomainError("Functionals: rel_tol must be positive");
    if (!table_.energy_source) throw DomainError("Functionals: ladder table has no attached Z^2 prefix cache");
}

const ZeroTable& Functionals::zeros() const {
    std::call_once(zeros_once_, [this] {
        zeros_ = std::make_unique<ZeroTable>(ZeroTable::build(std::ceil(table_.back()) + 1.0, opts_.eval));
    });
    return *zeros_;
}

std::vector<double> Functionals::iterates(double t, int depth) const {
    std::vector<double> v(static_cast<std::size_t>(depth) + 1);
    v[0] = t;
    for (int d = 1; d <= depth; ++d) {
        const double x = v[static_cast<std::size_t>(d) - 1];
        if (!(x >= table_.front() && x <= table_.back())) {
            throw DomainError("iterate depth " + std::to_string(d) + ": phi1 needed at " + num(x) +
                              ", outside the table domain [" + num(table_.front()) + ", " + num(table_.back()) + "]");
        }
        v[static_cast<std::size_t>(d)] = eval_phi1(table_, x);
    }
    return v;
}

void Functionals::require_domain(const IntervalSpec& spec, int depth) const {
    iterates(spec.T, depth);
    iterates(spec.T + spec.U, depth);
}

std::vector<double> Functionals::kink_points(double lo, double hi, int depth) const {
    const double y_lo = iterates(lo, depth).back();
    const double y_hi = iterates(hi, depth).back();
    std::vector<double> out;
    for (double g : zeros().zeros_between(y_lo, y_hi)) {
        if (g <= y_lo || g >= y_hi) continue;
        double s = g;
        for (int d = 0; d < depth; ++d) s = phi1_inverse(table_, s);
        if (s > lo && s < hi) out.push_back(s);
    }
    return out;
}

std::vector<double> Functionals::breakpoints(double lo, double hi, const std::vector<int>& depths) const {
    std::vector<double> pts{lo, hi};
    for (int d : depths) {
        const auto k = kink_points(lo, hi, d);
        pts.insert(pts.end(), k.begin(), k.end());
    }
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    for (double p : pts) {
        if (out.empty() || p - out.back() > 1e-9 * std::max(1.0, std::abs(p))) out.push_back(p);
    }
    out.back() = hi;
    return out;
}

IntegralResult Functionals::integrate_over(const Integrand& f, double lo, double hi, int factors,
                                           const std::vector<int>& kink_depths) const {
    if (hi <= lo) return zero_result();
    PanelPolicy policy = opts_.policy;
    policy.points_per_oscillation *= std::max(1, factors);
    const auto bps = breakpoints(lo, hi, kink_depths);
    return integrate_pieces_relative(f, bps, opts_.rel_tol, policy);
}

double Functionals::product_integrand(double t, int n) const {
    const auto v = iterates(t, n);
    double p = 1.0;
    for (int k = 0; k <= n; ++k) {
        const double z = hardy_z(v[static_cast<std::size_t>(k)], opts_.eval);
        p *= z * z;
    }
    return p;
}

double Functionals::theorem2_integrand(double t, int r, int n) const {
    const auto v = iterates(t, n + 1);
    double p = zeta_derivative_abs(v.back(), r, opts_.eval);
    for (int k = 0; k <= n; ++k) {
        const double z = hardy_z(v[static_cast<std::size_t>(k)], opts_.eval);
        p *= z * z;
    }
    return p;
}

double Functionals::s1_moment_integrand(double t, int n, int l) const {
    const auto v = iterates(t, n + 1);
    double p = std::pow(zeros().s1_of_t(v.back()).value, 2 * l);
    for (int k = 0; k <= n; ++k) {
        const double z = hardy_z(v[static_cast<std::size_t>(k)], opts_.eval);
        p *= z * z;
    }
    return p;
}

IntegralResult Functionals::ramachandra_lhs(const IntervalSpec& spec, int r) const {
    SignalParams{r, 0, 1, 1}.validate();
    if (spec.U == 0.0) return zero_result();
    spec.check();
    auto f = [&](double t) { return zeta_derivative_abs(t, r, opts_.eval); };
    return integrate_over(f, spec.T, spec.T + spec.U, 1, r == 0 ? std::vector<int>{0} : std::vector<int>{});
}

IntegralResult Functionals::product_energy(const IntervalSpec& spec, int n) const {
    SignalParams{0, n, 1, 1}.validate();
    if (!(spec.U >= 0.0)) throw DomainError("product_energy: U must be >= 0");
    if (spec.U == 0.0) return zero_result();
    require_domain(spec, n);
    auto f = [&](double t) { return product_integrand(t, n); };
    return integrate_over(f, spec.T, spec.T + spec.U, n + 1, {});
}

WeightedEnergy Functionals::weighted_product_energy(const std::function<double(double)>& F, const IntervalSpec& spec,
                                                    int n) const {
    SignalParams{0, n, 1, 1}.validate();
    if (!(spec.U >= 0.0)) throw DomainError("weighted_product_energy: U must be >= 0");
    WeightedEnergy out;
    out.result = zero_result();
    if (spec.U == 0.0) return out;
    require_domain(spec, n + 1);

    const double a = iterates(spec.T, n + 1).back();
    const double b = iterates(spec.T + spec.U, n + 1).back();
    bool pos = false;
    bool neg = false;
    const int samples = std::max(2, opts_.sign_samples);
    for (int i = 0; i < samples; ++i) {
        const double v = F(a + (b - a) * (i + 0.5) / samples);
        pos = pos || v > 0.0;
        neg = neg || v < 0.0;
    }
    if (pos && neg) {
        out.sign_warning = true;
        out.warning = "F changes sign on [" + num(a) + ", " + num(b) + "]; the formula assumes F >= 0 or F <= 0";
    }
    auto f = [&](double t) {
        const auto v = iterates(t, n + 1);
        double p = F(v.back());
        for (int k = 0; k <= n; ++k) {
            const double z = hardy_z(v[static_cast<std::size_t>(k)], opts_.eval);
            p *= z * z;
        }
        return p;
    };
    out.result = integrate_over(f, spec.T, spec.T + spec.U, n + 2, {});
    return out;
}

IntegralResult Functionals::theorem1_lhs(const IntervalSpec& spec, int r) const {
    SignalParams{r, 0, 1, 1}.validate();
    if (spec.U == 0.0) return zero_result();
    spec.check();
    const auto [a, b] = preimage_interval(table_, spec.T, spec.U);
    auto f = [&](double t) {
        const double z = hardy_z(t, opts_.eval);
        return zeta_derivative_abs(eval_phi1(table_, t), r, opts_.eval) * z * z;
    };
    return integrate_over(f, a, b, 2, r == 0 ? std::vector<int>{1} : std::vector<int>{});
}

IntegralResult Functionals::theorem2_lhs(const IntervalSpec& spec, int r, int n) const {
    SignalParams{r, n, 1, 1}.validate();
    if (spec.U == 0.0) return zero_result();
    spec.check();
    require_domain(spec, n + 1);
    auto f = [&](double t) { return theorem2_integrand(t, r, n); };
    return integrate_over(f, spec.T, spec.T + spec.U, n + 2, r == 0 ? std::vector<int>{n + 1} : std::vector<int>{});
}

IntegralResult Functionals::corollary_lhs(const IntervalSpec& spec, int r, int n, int m) const {
    SignalParams{r, n, m, 1}.validate();
    if (m < 1) throw DomainError("corollary_lhs: m must be >= 1");
    if (spec.U == 0.0) return zero_result();
    spec.check();
    require_domain(spec, n + 1);
    const double pd = std::ldexp(1.0, m);
    const double pz = std::ldexp(1.0, m + 1);
    auto f = [&](double t) {
        const auto v = iterates(t, n + 1);
        double s = pd * std::log(std::max(zeta_derivative_abs(v.back(), r, opts_.eval), kLogFloor));
        for (int k = 0; k <= n; ++k) s += pz * log_abs(hardy_z(v[static_cast<std::size_t>(k)], opts_.eval));
        return std::exp(s);
    };
    return integrate_over(f, spec.T, spec.T + spec.U, n + 2 + m, {});
}

IntegralResult Functionals::arg_moment(const IntervalSpec& spec, int n, int l) const {
    SignalParams{0, n, 1, l}.validate();
    if (spec.U == 0.0) return zero_result();
    spec.check();
    require_domain(spec, n + 1);
    const auto& zt = zeros();
    auto f = [&](double t) {
        const auto v = iterates(t, n + 1);
        double p = std::pow(kPi * zt.s_of_t(v.back(), false), 2 * l);
        for (int k = 0; k <= n; ++k) {
            const double z = hardy_z(v[static_cast<std::size_t>(k)], opts_.eval);
            p *= z * z;
        }
        return p;
    };
    return integrate_over(f, spec.T, spec.T + spec.U, n + 2, {n + 1});
}

IntegralResult Functionals::s1_moment(const IntervalSpec& spec, int n, int l) const {
    SignalParams{0, n, 1, l}.validate();
    if (spec.U == 0.0) return zero_result();
    spec.check();
    require_domain(spec, n + 1);
    zeros();
    auto f = [&](double t) { return s1_moment_integrand(t, n, l); };
    return integrate_over(f, spec.T, spec.T + spec.U, n + 2, {n + 1});
}

IntegralResult Functionals::fourth_power_energy(const IntervalSpec& spec, int n) const {
    SignalParams{0, n, 1, 1}.validate();
    if (spec.U == 0.0) return zero_result();
    spec.check();
    require_domain(spec, n + 1);
    auto f = [&](double t) {
        const auto v = iterates(t, n + 1);
        const double w = hardy_z(v.back(), opts_.eval);
        double p = w * w * w * w;
        for (int k = 0; k <= n; ++k) {
            const double z = hardy_z(v[static_cast<std::size_t>(k)], opts_.eval);
            p *= z * z;
        }
        return p;
    };
    return integrate_over(f, spec.T, spec.T + spec.U, n + 3, {});
}

IntegralResult Functionals::first_power_product(const IntervalSpec& spec, int n) const {
    SignalParams{0, n, 1, 1}.validate();
    if (spec.U == 0.0) return zero_result();
    spec.check();
    require_domain(spec, n);
    auto f = [&](double t) {
        const auto v = iterates(t, n);
        double p = 1.0;
        for (int k = 0; k <= n; ++k) p *= std::abs(hardy_z(v[static_cast<std::size_t>(k)], opts_.eval));
        return p;
    };
    std::vector<int> depths;
    for (int k = 0; k <= n; ++k) depths.push_back(k);
    return integrate_over(f, spec.T, spec.T + spec.U, n + 1, depths);
}

IntegralResult Functionals::remark_lhs(RemarkKind kind, const IntervalSpec& spec, int n, int m, int l) const {
    SignalParams{0, n, m, l}.validate();
    if (spec.U == 0.0) return zero_result();
    if (kind == RemarkKind::fourth) {
        // The remark's fourth-power line uses U_1 = T^{7/8+2ε}.
        const double u1 = std::pow(spec.T, 7.0 / 8.0 + 2.0 * spec.epsilon);
        if (std::abs(spec.U - u1) > 1e-9 * u1) {
            throw RegimeError("outside regime: requires U = T^{7/8+2ε} = " + num(u1) + " (ε = " + num(spec.epsilon) +
                              ") at T = " + num(spec.T) + ", U = " + num(spec.U));
        }
    } else {
        spec.check();
    }
    const int depth = kind == RemarkKind::product ? n : n + 1;
    require_domain(spec, depth);
    const double pz = std::ldexp(1.0, m + 1);
    const auto* zt = (kind == RemarkKind::arg || kind == RemarkKind::s1) ? &zeros() : nullptr;
    auto f = [&, kind](double t) {
        const auto v = iterates(t, depth);
        double s = 0.0;
        for (int k = 0; k <= n; ++k) s += pz * log_abs(hardy_z(v[static_cast<std::size_t>(k)], opts_.eval));
        switch (kind) {
            case RemarkKind::product: break;
            case RemarkKind::fourth: s += 2.0 * pz * log_abs(hardy_z(v.back(), opts_.eval)); break;
            case RemarkKind::arg: s += l * pz * log_abs(kPi * zt->s_of_t(v.back(), false)); break;
            case RemarkKind::s1: s += l * pz * log_abs(zt->s1_of_t(v.back()).value); break;
        }
        return std::exp(s);
    };
    std::vector<int> kinks;
    if (kind == RemarkKind::arg || kind == RemarkKind::s1) kinks.push_back(n + 1);
    return integrate_over(f, spec.T, spec.T + spec.U, depth + 1 + m, kinks);
}

}  // namespace ladderlab
