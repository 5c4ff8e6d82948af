#pragma once

#include "ladderlab/quadrature.hpp"

#include <complex>
#include <span>
#include <vector>

namespace ladderlab {

inline constexpr double kMaxHeight = 1.0e7;

struct EvalConfig {
    double target_abs_tol = 1e-9;
    // Riemann-Siegel remainder terms C_0 .. C_{n-1}; at most 5.
    int rs_correction_terms = 5;
    // Accuracy order of the central differences used for |zeta^(r)|.
    int fd_order = 4;
    // Below this height Z comes from Euler-Maclaurin and theta from log-Gamma.
    // With five correction terms the Riemann-Siegel error first drops under
    // 1e-9 near t = 400.
    double rs_crossover = 400.0;
    // Difference step is (2 pi / ln(t / 2 pi)) / fd_step_divisor.
    double fd_step_divisor = 64.0;
    // Largest accepted step-halving discrepancy, relative to |zeta^(r)|.
    double fd_check_rel = 1e-3;

    void validate() const;
};

struct CriticalPoint {
    double t = 0.0;
    double z = 0.0;
    double theta = 0.0;
};

// Riemann-Siegel theta, -(t/2) ln pi + Im ln Gamma(1/4 + i t/2).
double theta(double t, const EvalConfig& cfg = {});

// Hardy's Z(t) = exp(i theta(t)) zeta(1/2 + i t).
double hardy_z(double t, const EvalConfig& cfg = {});

CriticalPoint critical_point(double t, const EvalConfig& cfg = {});

// zeta(1/2 + i t) rebuilt as exp(-i theta) Z.
std::complex<double> zeta_on_line(double t, const EvalConfig& cfg = {});

// |zeta^(r)(1/2 + i t)| for r <= 4, t >= 10.
double zeta_derivative_abs(double t, int r, const EvalConfig& cfg = {});

// Euler-Maclaurin evaluation of zeta(s); used below the crossover.
std::complex<double> zeta_euler_maclaurin(std::complex<double> s, int n_terms, int m_terms);

// Number of zeros of Z in (0, t], by a fresh sign-change scan.
long zero_count(double t, const EvalConfig& cfg = {});

// S(t) = N(t) - 1 - theta(t) / pi.
double s_of_t(double t, const EvalConfig& cfg = {});

// S_1(T) = int_0^T S(t) dt.
IntegralResult s1_of_t(double T, const EvalConfig& cfg = {});

// Located zeros of Z on (0, t_max] with the derived N, S and S_1. Read-only
// once built; queries are safe from many threads.
class ZeroTable {
public:
    static ZeroTable build(double t_max, const EvalConfig& cfg = {});

    double t_max() const { return t_max_; }
    std::span<const double> zeros() const { return zeros_; }
    const EvalConfig& config() const { return cfg_; }

    // N(t). With guard set, t closer than zero_guard to a zero is rejected.
    long count(double t, bool guard = true) const;
    double s_of_t(double t, bool guard = true) const;
    IntegralResult s1_of_t(double T) const;

    // Zeros inside [lo, hi].
    std::vector<double> zeros_between(double lo, double hi) const;

    static constexpr double zero_guard = 1e-8;

private:
    double t_max_ = 0.0;
    EvalConfig cfg_;
    std::vector<double> zeros_;
    // S_1 at each zero, and its accumulated error estimate.
    std::vector<double> s1_at_zero_;
    std::vector<double> s1_err_at_zero_;
    double s1_at_ten_ = 0.0;
    double s1_err_at_ten_ = 0.0;
};

namespace detail {
// Riemann-Siegel sum without the phase bookkeeping, for callers that supply
// theta themselves (the energy cache marches the main sum incrementally).
double rs_remainder(double t, int terms);
double theta_asymptotic(double t);
// theta(t) and t ln k reduced mod 2 pi without losing the low bits at large t.
double theta_mod_two_pi(long double t);
double t_log_k_mod_two_pi(double t, long k);
double theta_log_gamma(double t);
}  // namespace detail

}  // namespace ladderlab
