#pragma once

#include <functional>
#include <span>
#include <vector>

namespace ladderlab {

struct IntegralResult {
    double value = 0.0;
    double abs_error_est = 0.0;
    long evaluations = 0;
    bool converged = true;
};

// Panel sizing for integrands built from |zeta| products. Initial panels are at
// most min(1, zero_spacing(b) * rule_order / points_per_oscillation) wide, where
// zero_spacing(t) = 2*pi / ln(t / 2*pi) is the local mean gap between zeros of Z.
struct PanelPolicy {
    int points_per_oscillation = 21;
    int max_depth = 30;
    int rule_order = 21;  // 15 (G7/K15) or 21 (G10/K21)

    void validate() const;
};

using Integrand = std::function<double(double)>;

// Mean spacing of zeros of Z near height t (clamped below for small t).
double zero_spacing(double t);

double panel_width_cap(double b, const PanelPolicy& policy);

// Globally adaptive Gauss-Kronrod integration with an absolute tolerance: the
// worst panel is bisected (at most max_depth times) until the summed error
// estimate is below tol. Failure is reported through converged = false.
IntegralResult integrate(const Integrand& f, double a, double b, double tol,
                         const PanelPolicy& policy = {});

// As integrate, with the absolute tolerance set to rel_tol times the magnitude
// of the unrefined first pass (floored at abs_floor).
IntegralResult integrate_relative(const Integrand& f, double a, double b, double rel_tol,
                                  const PanelPolicy& policy = {}, double abs_floor = 1e-300);

// Integrates over consecutive pieces [p0,p1], [p1,p2], ... so that known
// discontinuities of f fall on panel boundaries. Tolerance is relative.
IntegralResult integrate_pieces_relative(const Integrand& f, std::span<const double> breakpoints,
                                         double rel_tol, const PanelPolicy& policy = {});

// Prefix integrals int_a^{grid[i]} f for every grid point. Each cell is
// integrated on its own and the prefix is the running floating-point sum.
std::vector<IntegralResult> integrate_cumulative(const Integrand& f, double a,
                                                 std::span<const double> grid, double tol,
                                                 const PanelPolicy& policy = {});

// Pairwise (tree) summation; result depends only on the order of the input.
double pairwise_sum(std::span<const double> values);

}  // namespace ladderlab
