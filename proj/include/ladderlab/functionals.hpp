#pragma once

#include "ladderlab/ladder.hpp"
#include "ladderlab/quadrature.hpp"
#include "ladderlab/special_functions.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace ladderlab {

enum class Regime { short_range, macroscopic, half_plus, seven_eighths };

const char* regime_name(Regime r);
Regime regime_from_name(const std::string& name);

// A height T with an interval width U, tagged with the U-range it is meant for.
struct IntervalSpec {
    double T = 0.0;
    double U = 0.0;
    Regime regime = Regime::macroscopic;
    double epsilon = 0.01;
    double c_exp = 2.0;

    // Admissible [U_min, U_max] for the regime (U_min == U_max for seven_eighths).
    std::pair<double, double> range() const;
    // e.g. "U in [T^{1/3+2eps}, T/ln^2 T] = [25.7, 117.9]"
    std::string range_text() const;
    // RegimeError quoting range_text() when U is outside; U = 0 is always accepted.
    void check() const;

    static IntervalSpec at_upper(double T, Regime regime, double epsilon = 0.01, double c_exp = 2.0);
};

struct SignalParams {
    int r = 0;  // derivative order
    int n = 0;  // iteration depth
    int m = 1;  // squaring level
    int l = 1;  // moment order

    void validate() const;
};

// Exact (2l)! / (l! 4^l) = (2l - 1)!! / 2^l, for 1 <= l <= 20.
struct Rational {
    unsigned __int128 num = 0;
    std::uint64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const;
};
Rational moment_coefficient(int l);

struct FunctionalOptions {
    EvalConfig eval;
    PanelPolicy policy;
    double rel_tol = 1e-8;
    // Sample count used to test F for one-signedness.
    int sign_samples = 32;
};

struct WeightedEnergy {
    IntegralResult result;
    bool sign_warning = false;
    std::string warning;
};

// Integral functionals over a finished ladder table. Read-only after
// construction apart from the lazily built zero table; safe to share.
class Functionals {
public:
    Functionals(const LadderTable& table, FunctionalOptions opts = {});

    const LadderTable& table() const { return table_; }
    const FunctionalOptions& options() const { return opts_; }

    // int_T^{T+U} |zeta^(r)(1/2 + it)| dt
    IntegralResult ramachandra_lhs(const IntervalSpec& spec, int r) const;
    // int_T^{T+U} prod_{k<=n} |zeta(1/2 + i phi_1^k(t))|^2 dt
    IntegralResult product_energy(const IntervalSpec& spec, int n) const;
    WeightedEnergy weighted_product_energy(const std::function<double(double)>& F, const IntervalSpec& spec,
                                           int n) const;
    // over the preimage [T°, (T+U)°] of [T, T+U]
    IntegralResult theorem1_lhs(const IntervalSpec& spec, int r) const;
    IntegralResult theorem2_lhs(const IntervalSpec& spec, int r, int n) const;
    IntegralResult corollary_lhs(const IntervalSpec& spec, int r, int n, int m) const;
    IntegralResult arg_moment(const IntervalSpec& spec, int n, int l) const;
    IntegralResult s1_moment(const IntervalSpec& spec, int n, int l) const;
    IntegralResult fourth_power_energy(const IntervalSpec& spec, int n) const;
    IntegralResult first_power_product(const IntervalSpec& spec, int n) const;

    // Remark-2 style integrals: prod |zeta(phi_1^k)|^{2^{m+1}} times an optional
    // extra factor at phi_1^{n+1}, one per kind.
    enum class RemarkKind { product, fourth, arg, s1 };
    IntegralResult remark_lhs(RemarkKind kind, const IntervalSpec& spec, int n, int m, int l) const;

    // Integrands at a single point, for factorization checks.
    double product_integrand(double t, int n) const;
    double theorem2_integrand(double t, int r, int n) const;
    double s1_moment_integrand(double t, int n, int l) const;

    const ZeroTable& zeros() const;

private:
    std::vector<double> iterates(double t, int depth) const;
    // t in [lo, hi] with phi_1^depth(t) equal to a zero of Z.
    std::vector<double> kink_points(double lo, double hi, int depth) const;
    std::vector<double> breakpoints(double lo, double hi, const std::vector<int>& depths) const;
    IntegralResult integrate_over(const Integrand& f, double lo, double hi, int factors,
                                  const std::vector<int>& kink_depths) const;
    void require_domain(const IntervalSpec& spec, int depth) const;

    const LadderTable& table_;
    FunctionalOptions opts_;
    mutable std::once_flag zeros_once_;
    mutable std::unique_ptr<ZeroTable> zeros_;
};

}  // namespace ladderlab
