#include "ladderlab/special_functions.hpp"

#include "ladderlab/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace ladderlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string describe(const char* what, double t) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " (t = " << t << ")";
    return msg.str();
}

void check_height(double t, const char* op) {
    if (!(t >= 0.0) || t > kMaxHeight) {
        throw DomainError(describe((std::string(op) + ": t outside supported range [0, 1e7]").c_str(), t));
    }
}

// ---------------------------------------------------------------------------
// Riemann-Siegel remainder coefficients.
//
// Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) is entire. Its Taylor
// coefficients about p = 1/2 are taken once from a Cauchy integral on the unit
// circle; C_0..C_4 are then fixed combinations of Psi derivatives, stored as
// polynomials in z = p - 1/2.

constexpr int kTaylorTerms = 64;
constexpr int kMaxRsTerms = 5;

std::array<double, kTaylorTerms> psi_taylor() {
    constexpr int samples = 256;
    std::array<double, kTaylorTerms> a{};
    for (int j = 0; j < samples; ++j) {
        const double phi = kTwoPi * j / samples;
        const std::complex<double> z = std::polar(1.0, phi);
        const std::complex<double> p = 0.5 + z;
        const std::complex<double> psi =
            std::cos(kTwoPi * (p * p - p - 1.0 / 16.0)) / std::cos(kTwoPi * p);
        for (int k = 0; k < kTaylorTerms; ++k) {
            a[k] += (psi * std::polar(1.0, -k * phi)).real() / samples;
        }
    }
    return a;
}

struct RsCoefficients {
    std::array<std::vector<double>, kMaxRsTerms> poly;
};

const RsCoefficients& rs_coefficients() {
    static const RsCoefficients coeffs = [] {
        const auto a = psi_taylor();
        // (coefficient, derivative order) pairs for C_0..C_4.
        const double p2 = kPi * kPi;
        const double p4 = p2 * p2;
        const double p6 = p4 * p2;
        const double p8 = p4 * p4;
        const std::array<std::vector<std::pair<double, int>>, kMaxRsTerms> recipe = {{
            {{1.0, 0}},
            {{-1.0 / (96.0 * p2), 3}},
            {{1.0 / (64.0 * p2), 2}, {1.0 / (18432.0 * p4), 6}},
            {{-1.0 / (64.0 * p2), 1}, {-1.0 / (3840.0 * p4), 5}, {-1.0 / (5308416.0 * p6), 9}},
            {{1.0 / (128.0 * p2), 0},
             {19.0 / (24576.0 * p4), 4},
             {11.0 / (5898240.0 * p6), 8},
             {1.0 / (2038431744.0 * p8), 12}},
        }};
        RsCoefficients out;
        for (int j = 0; j < kMaxRsTerms; ++j) {
            std::vector<double> poly(kTaylorTerms, 0.0);
            for (const auto& [c, d] : recipe[j]) {
                for (int m = 0; m + d < kTaylorTerms; ++m) {
                    double falling = 1.0;
                    for (int q = m + 1; q <= m + d; ++q) falling *= q;
                    poly[m] += c * a[m + d] * falling;
                }
            }
            // |z| <= 1/2, so trailing terms below 1e-18 after scaling are dropped.
            while (poly.size() > 1 && std::abs(poly.back()) * std::ldexp(1.0, -static_cast<int>(poly.size() - 1)) < 1e-18) {
                poly.pop_back();
            }
            out.poly[j] = std::move(poly);
        }
        return out;
    }();
    return coeffs;
}

double horner(const std::vector<double>& c, double z) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
    return acc;
}

// Split x into a head with at most 53 - bits significant bits and a tail.
double split_head(double x, int bits) {
    const double factor = std::ldexp(1.0, bits) + 1.0;
    const double c = factor * x;
    return c - (c - x);
}

// Round to nearest integer; valid for |x| < 2^51.
double round_nearest(double x) {
    constexpr double magic = 6755399441055744.0;  // 1.5 * 2^52
    return (x + magic) - magic;
}

// ln k split into a 26-bit head and a tail, so that head(t) * head(ln k) is
// exact and t ln k mod 2 pi keeps full precision at large t. 2 pi is split
// Cody-Waite style for the same reason.
struct MainSumTables {
    std::vector<double> log_head;
    std::vector<double> log_tail;
    std::vector<double> inv_sqrt_k;
    double two_pi_1 = 0.0;
    double two_pi_2 = 0.0;
    double two_pi_3 = 0.0;
};

const MainSumTables& main_sum_tables() {
    static const MainSumTables tables = [] {
        const int n = static_cast<int>(std::sqrt(kMaxHeight / kTwoPi)) + 2;
        MainSumTables t;
        t.log_head.resize(n + 1);
        t.log_tail.resize(n + 1);
        t.inv_sqrt_k.resize(n + 1);
        for (int k = 1; k <= n; ++k) {
            const long double lk = std::log(static_cast<long double>(k));
            t.log_head[k] = split_head(static_cast<double>(lk), 27);
            t.log_tail[k] = static_cast<double>(lk - t.log_head[k]);
            t.inv_sqrt_k[k] = 1.0 / std::sqrt(static_cast<double>(k));
        }
        const long double two_pi = 6.283185307179586476925286766559005768L;
        t.two_pi_1 = split_head(static_cast<double>(two_pi), 26);
        t.two_pi_2 = split_head(static_cast<double>(two_pi - t.two_pi_1), 26);
        t.two_pi_3 = static_cast<double>(two_pi - t.two_pi_1 - t.two_pi_2);
        return t;
    }();
    return tables;
}

long double theta_asymptotic_ld(long double x) {
    const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
    const long double inv = 1.0L / x;
    const long double inv2 = inv * inv;
    const long double series =
        inv * (1.0L / 48.0L +
               inv2 * (7.0L / 5760.0L +
                       inv2 * (31.0L / 80640.0L + inv2 * (127.0L / 430080.0L + inv2 * (511.0L / 1216512.0L)))));
    return 0.5L * x * (std::log(x / two_pi) - 1.0L) - std::numbers::pi_v<long double> / 8.0L + series;
}

double reduce_two_pi(long double phase) {
    const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
    return static_cast<double>(phase - std::nearbyint(phase / two_pi) * two_pi);
}

double hardy_z_riemann_siegel(double t, int terms) {
    const auto& tab = main_sum_tables();
    const double a = std::sqrt(t / kTwoPi);
    const auto n = static_cast<long>(std::floor(a));
    const double th = reduce_two_pi(theta_asymptotic_ld(t));
    const double t_head = split_head(t, 27);
    const double t_tail = t - t_head;
    constexpr double inv_two_pi = 1.0 / kTwoPi;
    double sum = 0.0;
    for (long k = 1; k <= n; ++k) {
        const double big = t_head * tab.log_head[k];  // exact
        const double small = t_head * tab.log_tail[k] + t_tail * (tab.log_head[k] + tab.log_tail[k]);
        const double q = round_nearest(big * inv_two_pi);
        const double r = ((big - q * tab.two_pi_1) - q * tab.two_pi_2) - q * tab.two_pi_3 + small;
        sum += tab.inv_sqrt_k[k] * std::cos(th - r);
    }
    return 2.0 * sum + detail::rs_remainder(t, terms);
}

double hardy_z_euler_maclaurin(double t, const EvalConfig& cfg) {
    const std::complex<double> s(0.5, t);
    const int n = 12 + static_cast<int>(std::ceil(t));
    const std::complex<double> zeta = zeta_euler_maclaurin(s, n, 14);
    const double th = detail::theta_log_gamma(t);
    (void)cfg;
    return (std::polar(1.0, th) * zeta).real();
}

double hardy_z_by_method(double t, bool riemann_siegel, const EvalConfig& cfg) {
    return riemann_siegel ? hardy_z_riemann_siegel(t, cfg.rs_correction_terms) : hardy_z_euler_maclaurin(t, cfg);
}

double theta_by_method(double t, bool asymptotic) {
    return asymptotic ? static_cast<double>(theta_asymptotic_ld(t)) : detail::theta_log_gamma(t);
}

std::complex<double> zeta_on_line_by_method(double t, bool riemann_siegel, const EvalConfig& cfg) {
    const double z = hardy_z_by_method(t, riemann_siegel, cfg);
    const double th = theta_by_method(t, riemann_siegel);
    return {z * std::cos(th), -z * std::sin(th)};
}

// Fornberg weights for the r-th derivative on the integer stencil -m..m.
std::vector<double> central_weights(int r, int m) {
    const int n = 2 * m + 1;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = static_cast<double>(i - m);
    // c[j][k]: weight of node j for derivative k.
    std::vector<std::vector<double>> c(n, std::vector<double>(r + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0];
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, r);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i];
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][r];
    return w;
}

std::complex<double> central_difference(double t, double h, int r, const std::vector<double>& w, bool rs,
                                        const EvalConfig& cfg) {
    const int m = static_cast<int>(w.size() / 2);
    std::complex<double> acc = 0.0;
    for (int j = -m; j <= m; ++j) {
        const double wj = w[j + m];
        if (wj == 0.0) continue;
        acc += wj * zeta_on_line_by_method(t + j * h, rs, cfg);
    }
    return acc / std::pow(h, r);
}

}  // namespace

// ---------------------------------------------------------------------------

void EvalConfig::validate() const {
    if (!(target_abs_tol > 0.0)) throw DomainError("EvalConfig: target_abs_tol must be positive");
    if (rs_correction_terms < 0 || rs_correction_terms > kMaxRsTerms) {
        throw DomainError("EvalConfig: rs_correction_terms must be in [0, 5]");
    }
    if (fd_order < 2 || fd_order % 2 != 0 || fd_order > 8) {
        throw DomainError("EvalConfig: fd_order must be an even integer in [2, 8]");
    }
    if (!(rs_crossover >= 10.0 && rs_crossover <= 512.0)) {
        throw DomainError("EvalConfig: rs_crossover must be in [10, 512]");
    }
    if (!(fd_step_divisor >= 1.0)) throw DomainError("EvalConfig: fd_step_divisor must be >= 1");
    if (!(fd_check_rel > 0.0)) throw DomainError("EvalConfig: fd_check_rel must be positive");
}

namespace detail {

double rs_remainder(double t, int terms) {
    if (terms <= 0) return 0.0;
    const auto& co = rs_coefficients();
    const double a = std::sqrt(t / kTwoPi);
    const auto n = static_cast<long>(std::floor(a));
    const double z = (a - static_cast<double>(n)) - 0.5;
    const double u = std::sqrt(kTwoPi / t);
    double acc = 0.0;
    double scale = 1.0;
    for (int j = 0; j < std::min(terms, kMaxRsTerms); ++j) {
        acc += horner(co.poly[j], z) * scale;
        scale *= u;
    }
    const double sign = (n % 2 == 1) ? 1.0 : -1.0;  // (-1)^(N-1)
    return sign * std::sqrt(u) * acc;
}

double theta_asymptotic(double t) { return static_cast<double>(theta_asymptotic_ld(t)); }

double theta_mod_two_pi(long double t) { return reduce_two_pi(theta_asymptotic_ld(t)); }

double t_log_k_mod_two_pi(double t, long k) {
    const auto& tab = main_sum_tables();
    if (k < 1 || k >= static_cast<long>(tab.log_head.size())) throw DomainError("t_log_k_mod_two_pi: k out of table range");
    const double t_head = split_head(t, 27);
    const double t_tail = t - t_head;
    const double big = t_head * tab.log_head[k];
    const double small = t_head * tab.log_tail[k] + t_tail * (tab.log_head[k] + tab.log_tail[k]);
    const double q = round_nearest(big * (1.0 / kTwoPi));
    return ((big - q * tab.two_pi_1) - q * tab.two_pi_2) - q * tab.two_pi_3 + small;
}

double theta_log_gamma(double t) {
    // Im ln Gamma(1/4 + i t/2) by upward recurrence and Stirling's series.
    const std::complex<double> z(0.25, 0.5 * t);
    int shift = 0;
    if (std::abs(z) < 20.0) shift = static_cast<int>(std::ceil(20.0 - 0.25));
    const std::complex<double> w = z + static_cast<double>(shift);
    const std::complex<double> lw = std::log(w);
    std::complex<double> lg = (w - 0.5) * lw - w + 0.5 * std::log(kTwoPi);
    const std::complex<double> w2 = w * w;
    std::complex<double> wpow = w;
    for (int k = 1; k <= 10; ++k) {
        const double b = boost::math::bernoulli_b2n<double>(k);
        lg += b / (2.0 * k * (2.0 * k - 1.0)) / wpow;
        wpow *= w2;
    }
    double im = lg.imag();
    for (int k = 0; k < shift; ++k) im -= std::arg(z + static_cast<double>(k));
    return im - 0.5 * t * std::log(kPi);
}

}  // namespace detail

std::complex<double> zeta_euler_maclaurin(std::complex<double> s, int n_terms, int m_terms) {
    if (n_terms < 1) throw DomainError("zeta_euler_maclaurin: n_terms must be >= 1");
    std::complex<double> sum = 0.0;
    for (int n = 1; n < n_terms; ++n) sum += std::exp(-s * std::log(static_cast<double>(n)));
    const double nn = n_terms;
    const std::complex<double> n_pow = std::exp(-s * std::log(nn));  // N^{-s}
    sum += n_pow * nn / (s - 1.0) + 0.5 * n_pow;
    // T_k = s (s+1) ... (s+2k-2) N^{-s-2k+1}
    std::complex<double> term = s * n_pow / nn;
    double fact = 2.0;  // (2k)!
    for (int k = 1; k <= m_terms; ++k) {
        sum += boost::math::bernoulli_b2n<double>(k) / fact * term;
        term *= (s + (2.0 * k - 1.0)) * (s + 2.0 * k) / (nn * nn);
        fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
    }
    return sum;
}

double theta(double t, const EvalConfig& cfg) {
    check_height(t, "theta");
    return theta_by_method(t, t >= cfg.rs_crossover);
}

double hardy_z(double t, const EvalConfig& cfg) {
    check_height(t, "hardy_z");
    return hardy_z_by_method(t, t >= cfg.rs_crossover, cfg);
}

CriticalPoint critical_point(double t, const EvalConfig& cfg) { return {t, hardy_z(t, cfg), theta(t, cfg)}; }

std::complex<double> zeta_on_line(double t, const EvalConfig& cfg) {
    check_height(t, "zeta_on_line");
    return zeta_on_line_by_method(t, t >= cfg.rs_crossover, cfg);
}

double zeta_derivative_abs(double t, int r, const EvalConfig& cfg) {
    if (r < 0 || r > 4) throw DomainError("zeta_derivative_abs: supported derivative orders are 0..4");
    check_height(t, "zeta_derivative_abs");
    if (r == 0) return std::abs(hardy_z(t, cfg));
    if (t < 10.0) throw DomainError(describe("zeta_derivative_abs: difference step underflow below t = 10", t));

    const double h = zero_spacing(t) / cfg.fd_step_divisor;
    const int m = (r + 1) / 2 + cfg.fd_order / 2 - 1;
    const auto w = central_weights(r, m);
    const bool rs = t >= cfg.rs_crossover;

    const auto coarse = central_difference(t, h, r, w, rs, cfg);
    const auto fine = central_difference(t, 0.5 * h, r, w, rs, cfg);
    const double gain = std::pow(2.0, cfg.fd_order) - 1.0;
    const auto extrapolated = fine + (fine - coarse) / gain;

    const double value = std::abs(extrapolated);
    const double err = std::abs(fine - coarse) / gain;
    const double floor = 0.05 * std::pow(0.5 * std::log(t / kTwoPi), r);
    if (err > cfg.fd_check_rel * std::max(value, floor)) {
        std::ostringstream msg;
        msg.precision(6);
        msg << "zeta_derivative_abs: differences at steps h and h/2 disagree (r = " << r << ", t = " << t
            << ", estimate " << err << " vs value " << value << ")";
        throw ConvergenceError(msg.str());
    }
    return value;
}

// ---------------------------------------------------------------------------
// Zero scanning.

namespace {

double locate_root(double lo, double hi, double zlo, double zhi, const EvalConfig& cfg) {
    auto f = [&](double t) { return hardy_z(t, cfg); };
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, zlo, zhi,
                                                     boost::math::tools::eps_tolerance<double>(48), iters);
    return 0.5 * (r.first + r.second);
}

void scan_zeros(double t_max, const EvalConfig& cfg, std::vector<double>& zeros, double& last_grid) {
    auto sign = [](double v) { return v < 0.0 ? -1 : 1; };
    double t_prev = 0.0;
    double z_prev = hardy_z(0.0, cfg);
    double t_cur = t_prev;
    double z_cur = z_prev;
    bool have_prev = false;

    while (t_cur < t_max) {
        const double t_next = std::min(t_cur + zero_spacing(std::max(t_cur, 1.0)) / 8.0, t_max);
        const double z_next = hardy_z(t_next, cfg);
        if (z_next == 0.0 || z_cur == 0.0) {
            throw AmbiguityError(describe("zero_count: Z vanishes exactly on the scan grid", z_next == 0.0 ? t_next : t_cur));
        }
        if (sign(z_cur) != sign(z_next)) {
            zeros.push_back(locate_root(t_cur, t_next, z_cur, z_next, cfg));
        } else if (have_prev && sign(z_prev) == sign(z_cur) && std::abs(z_cur) < std::abs(z_prev) &&
                   std::abs(z_cur) < std::abs(z_next)) {
            // |Z| dips without a sign change: look for a hidden close pair.
            const double s = sign(z_cur);
            auto g = [&](double t) { return s * hardy_z(t, cfg); };
            boost::uintmax_t iters = 200;
            const auto [t_min, g_min] = boost::math::tools::brent_find_minima(g, t_prev, t_next, 40, iters);
            if (g_min < 0.0) {
                const double z_min = s * g_min;
                zeros.push_back(locate_root(t_prev, t_min, z_prev, z_min, cfg));
                zeros.push_back(locate_root(t_min, t_next, z_min, z_next, cfg));
                std::sort(zeros.end() - 2, zeros.end());
            } else if (g_min < 10.0 * cfg.target_abs_tol) {
                throw AmbiguityError(describe("zero_count: cannot resolve a near-double zero", t_min));
            }
        }
        t_prev = t_cur;
        z_prev = z_cur;
        t_cur = t_next;
        z_cur = z_next;
        have_prev = true;
    }
    last_grid = t_cur;
}

}  // namespace

ZeroTable ZeroTable::build(double t_max, const EvalConfig& cfg) {
    cfg.validate();
    check_height(t_max, "ZeroTable::build");
    ZeroTable table;
    table.cfg_ = cfg;
    scan_zeros(t_max, cfg, table.zeros_, table.t_max_);

    using boost::math::quadrature::gauss_kronrod;
    auto th = [&](double t) { return theta(t, cfg); };
    auto theta_integral = [&](double a, double b, double& err) {
        if (b <= a) {
            err = 0.0;
            return 0.0;
        }
        return gauss_kronrod<double, 15>::integrate(th, a, b, 0, 0.0, &err);
    };

    // S_1(10) = -10 - (1/pi) int_0^10 theta, since N = 0 on (0, 10].
    {
        const auto q = integrate(th, 0.0, 10.0, 1e-11);
        table.s1_at_ten_ = -10.0 - q.value / kPi;
        table.s1_err_at_ten_ = q.abs_error_est / kPi;
    }
    long double acc = table.s1_at_ten_;
    long double acc_err = table.s1_err_at_ten_;
    double left = 10.0;
    long n_left = 0;
    table.s1_at_zero_.reserve(table.zeros_.size());
    for (double g : table.zeros_) {
        double err = 0.0;
        const double q = theta_integral(left, g, err);
        acc += static_cast<long double>(n_left - 1) * (g - left) - q / kPi;
        acc_err += err / kPi;
        table.s1_at_zero_.push_back(static_cast<double>(acc));
        table.s1_err_at_zero_.push_back(static_cast<double>(acc_err));
        left = g;
        ++n_left;
    }
    return table;
}

long ZeroTable::count(double t, bool guard) const {
    if (!(t >= 0.0) || t > t_max_) {
        throw DomainError(describe("ZeroTable: t outside the scanned range", t));
    }
    const auto it = std::upper_bound(zeros_.begin(), zeros_.end(), t);
    if (guard) {
        if (it != zeros_.end() && *it - t < zero_guard) throw DomainError(describe("S/N requested at a zero ordinate", t));
        if (it != zeros_.begin() && t - *(it - 1) < zero_guard) {
            throw DomainError(describe("S/N requested at a zero ordinate", t));
        }
    }
    return static_cast<long>(it - zeros_.begin());
}

double ZeroTable::s_of_t(double t, bool guard) const {
    const long n = count(t, guard);
    return static_cast<double>(n) - 1.0 - theta(t, cfg_) / kPi;
}

IntegralResult ZeroTable::s1_of_t(double T) const {
    if (!(T >= 0.0) || T > t_max_) throw DomainError(describe("s1_of_t: T outside the scanned range", T));
    using boost::math::quadrature::gauss_kronrod;
    auto th = [&](double t) { return theta(t, cfg_); };
    IntegralResult out;
    if (T <= 10.0) {
        const auto q = integrate(th, 0.0, T, 1e-11);
        out.value = -T - q.value / kPi;
        out.abs_error_est = q.abs_error_est / kPi;
        out.evaluations = q.evaluations;
        return out;
    }
    const auto it = std::upper_bound(zeros_.begin(), zeros_.end(), T);
    const long n = static_cast<long>(it - zeros_.begin());
    double base = s1_at_ten_;
    double base_err = s1_err_at_ten_;
    double left = 10.0;
    if (n > 0) {
        base = s1_at_zero_[n - 1];
        base_err = s1_err_at_zero_[n - 1];
        left = zeros_[n - 1];
    }
    double err = 0.0;
    const double q = T > left ? gauss_kronrod<double, 15>::integrate(th, left, T, 0, 0.0, &err) : 0.0;
    out.value = base + static_cast<double>(n - 1) * (T - left) - q / kPi;
    out.abs_error_est = base_err + err / kPi;
    out.evaluations = 15;
    return out;
}

std::vector<double> ZeroTable::zeros_between(double lo, double hi) const {
    const auto a = std::lower_bound(zeros_.begin(), zeros_.end(), lo);
    const auto b = std::upper_bound(zeros_.begin(), zeros_.end(), hi);
    return {a, b};
}

long zero_count(double t, const EvalConfig& cfg) { return ZeroTable::build(t, cfg).count(t); }

double s_of_t(double t, const EvalConfig& cfg) { return ZeroTable::build(t, cfg).s_of_t(t); }

IntegralResult s1_of_t(double T, const EvalConfig& cfg) { return ZeroTable::build(std::max(T, 10.0), cfg).s1_of_t(T); }

}  // namespace ladderlab
