#pragma once

// Reference implementations kept independent of the library: long-double
// Euler-Maclaurin for zeta on the critical line and the Stirling series for
// theta. Slow but accurate to ~1e-12 for 50 <= t <= 1e5.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cld = std::complex<long double>;

inline long double theta(long double t) {
    const long double pi = 3.141592653589793238462643383279502884L;
    const long double t2 = t * t;
    return t / 2 * std::log(t / (2 * pi)) - t / 2 - pi / 8 + 1 / (48 * t) + 7 / (5760 * t * t2) +
           31 / (80640 * t * t2 * t2) + 127 / (430080 * t * t2 * t2 * t2) +
           511 / (1216512 * t * t2 * t2 * t2 * t2);
}

// zeta(1/2 + i t) with N = t/2 + 20 direct terms and 12 Bernoulli corrections.
inline cld zeta_line(long double t) {
    static const long double bern[] = {1.0L / 6,       -1.0L / 30,        1.0L / 42,        -1.0L / 30,
                                       5.0L / 66,      -691.0L / 2730,    7.0L / 6,         -3617.0L / 510,
                                       43867.0L / 798, -174611.0L / 330,  854513.0L / 138,  -236364091.0L / 2730};
    const cld s(0.5L, t);
    const long N = static_cast<long>(t / 2) + 20;
    cld sum = 0;
    for (long n = 1; n < N; ++n) {
        const long double ln = std::log(static_cast<long double>(n));
        const long double mag = std::exp(-0.5L * ln);
        sum += cld(mag * std::cos(t * ln), -mag * std::sin(t * ln));
    }
    const long double lnN = std::log(static_cast<long double>(N));
    const cld Ns = std::exp(-s * lnN);  // N^{-s}
    sum += static_cast<long double>(N) * Ns / (s - 1.0L) + 0.5L * Ns;
    cld rise = s;  // s (s+1) ... (s+2k-2)
    long double fact = 2;  // (2k)!
    cld power = Ns / static_cast<long double>(N);  // N^{-s-1}
    for (int k = 1; k <= 12; ++k) {
        sum += bern[k - 1] / fact * rise * power;
        rise *= (s + static_cast<long double>(2 * k - 1)) * (s + static_cast<long double>(2 * k));
        fact *= static_cast<long double>((2 * k + 1) * (2 * k + 2));
        power /= static_cast<long double>(N) * static_cast<long double>(N);
    }
    return sum;
}

inline double hardy_z(double t) {
    const long double th = theta(t);
    const cld z = cld(std::cos(th), std::sin(th)) * zeta_line(t);
    return static_cast<double>(z.real());
}

// Composite Simpson with an even number of steps.
inline double simpson(const std::function<double(double)>& f, double a, double b, long steps) {
    if (steps % 2) ++steps;
    const double h = (b - a) / static_cast<double>(steps);
    long double s = f(a) + f(b);
    for (long i = 1; i < steps; ++i) s += (i % 2 ? 4.0L : 2.0L) * f(a + h * static_cast<double>(i));
    return static_cast<double>(s * h / 3);
}

// Sign changes of f on a uniform grid over (a, b].
inline long sign_changes(const std::function<double(double)>& f, double a, double b, double h) {
    long count = 0;
    double prev = f(a);
    const long steps = static_cast<long>(std::ceil((b - a) / h));
    for (long i = 1; i <= steps; ++i) {
        const double x = std::min(b, a + h * static_cast<double>(i));
        const double v = f(x);
        if ((v < 0) != (prev < 0)) ++count;
        prev = v;
    }
    return count;
}

// int_a^b |Z| split at the zeros of Z, each located by bisection on the
// oracle itself, then Simpson on every smooth piece.
inline double abs_z_integral(double a, double b, double scan = 0.05, long steps_per_piece = 64) {
    std::vector<double> cuts{a};
    double x0 = a;
    double z0 = hardy_z(a);
    while (x0 < b) {
        const double x1 = std::min(b, x0 + scan);
        const double z1 = hardy_z(x1);
        if ((z0 < 0) != (z1 < 0)) {
            double lo = x0, hi = x1;
            for (int i = 0; i < 60; ++i) {
                const double mid = 0.5 * (lo + hi);
                ((hardy_z(mid) < 0) == (z0 < 0) ? lo : hi) = mid;
            }
            cuts.push_back(0.5 * (lo + hi));
        }
        x0 = x1;
        z0 = z1;
    }
    cuts.push_back(b);
    long double total = 0;
    for (std::size_t i = 1; i < cuts.size(); ++i)
        total += simpson([](double t) { return std::abs(hardy_z(t)); }, cuts[i - 1], cuts[i], steps_per_piece);
    return static_cast<double>(total);
}

}  // namespace oracle
