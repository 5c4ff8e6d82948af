#include "ladderlab/quadrature.hpp"

#include "ladderlab/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

namespace ladderlab {

namespace {

// Symmetric Gauss-Kronrod rule expanded to full node lists on [-1, 1].
struct KronrodRule {
    std::vector<double> nodes;
    std::vector<double> kronrod_weights;
    std::vector<double> gauss_weights;  // zero where the node is Kronrod-only
};

template <unsigned KPoints>
KronrodRule make_rule() {
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    constexpr unsigned GPoints = (KPoints - 1) / 2;
    const auto& kx = gauss_kronrod<double, KPoints>::abscissa();
    const auto& kw = gauss_kronrod<double, KPoints>::weights();
    const auto& gx = gauss<double, GPoints>::abscissa();
    const auto& gw = gauss<double, GPoints>::weights();

    auto gauss_weight_at = [&](double x) {
        for (std::size_t j = 0; j < gx.size(); ++j) {
            if (std::abs(gx[j] - x) < 1e-14) return gw[j];
        }
        return 0.0;
    };

    KronrodRule rule;
    for (std::size_t i = kx.size(); i-- > 1;) {
        rule.nodes.push_back(-kx[i]);
        rule.kronrod_weights.push_back(kw[i]);
        rule.gauss_weights.push_back(gauss_weight_at(kx[i]));
    }
    for (std::size_t i = 0; i < kx.size(); ++i) {
        rule.nodes.push_back(kx[i]);
        rule.kronrod_weights.push_back(kw[i]);
        rule.gauss_weights.push_back(gauss_weight_at(kx[i]));
    }
    return rule;
}

const KronrodRule& rule_for(int order) {
    static const KronrodRule k15 = make_rule<15>();
    static const KronrodRule k21 = make_rule<21>();
    return order == 15 ? k15 : k21;
}

// Refinement budget per call, beyond the first pass.
constexpr std::size_t kMaxBisections = std::size_t{1} << 18;

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
    double roundoff = 0.0;  // error floor set by cancellation in the rule itself
};

Panel apply_rule(const Integrand& f, double a, double b, const KronrodRule& rule, long& evals) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const std::size_t n = rule.nodes.size();

    std::array<double, 21> fx{};
    double kronrod = 0.0;
    double gauss = 0.0;
    double resabs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = center + half * rule.nodes[i];
        const double y = f(x);
        if (std::isnan(y)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "integrand returned NaN at t = " << x;
            throw DomainError(msg.str());
        }
        fx[i] = y;
        kronrod += rule.kronrod_weights[i] * y;
        gauss += rule.gauss_weights[i] * y;
        resabs += rule.kronrod_weights[i] * std::abs(y);
    }
    evals += static_cast<long>(n);

    const double mean = 0.5 * kronrod;
    double resasc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        resasc += rule.kronrod_weights[i] * std::abs(fx[i] - mean);
    }
    kronrod *= half;
    gauss *= half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);

    // QUADPACK error heuristic.
    double err = std::abs(kronrod - gauss);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double roundoff = 50.0 * eps * resabs;
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(roundoff, err);
    }
    return {a, b, kronrod, err, roundoff};
}

struct Node {
    Panel panel;
    int depth = 0;
    bool frozen = false;  // at max_depth or the rounding floor
};

// Global adaptivity: the panel with the largest error is bisected until the
// summed error meets tol. Unlike a per-panel budget this tolerates integrands
// whose evaluation noise exceeds the local share of tol on a narrow spike.
template <typename TolFn>
IntegralResult run(const Integrand& f, double a, double b, const PanelPolicy& policy, TolFn tol_from_first_pass) {
    policy.validate();
    if (!(a <= b)) throw DomainError("integrate: requires a <= b");
    if (a == b) return {0.0, 0.0, 0, true};

    const KronrodRule& rule = rule_for(policy.rule_order);
    const double cap = panel_width_cap(b, policy);
    const auto count = static_cast<long>(std::ceil((b - a) / cap));
    const long n0 = std::max<long>(1, count);
    const double width = (b - a) / static_cast<double>(n0);

    long evals = 0;
    std::vector<Node> nodes;
    nodes.reserve(static_cast<std::size_t>(n0));
    for (long i = 0; i < n0; ++i) {
        const double lo = a + width * static_cast<double>(i);
        const double hi = (i + 1 == n0) ? b : a + width * static_cast<double>(i + 1);
        nodes.push_back({apply_rule(f, lo, hi, rule, evals), 0, false});
    }
    std::vector<double> first_values;
    first_values.reserve(nodes.size());
    for (const auto& n : nodes) first_values.push_back(n.panel.value);
    const double tol = tol_from_first_pass(pairwise_sum(first_values));

    auto stuck = [&](const Node& n) {
        const double mid = 0.5 * (n.panel.a + n.panel.b);
        return n.depth >= policy.max_depth || n.panel.error <= n.panel.roundoff ||
               !(mid > n.panel.a && mid < n.panel.b);
    };
    // (error, index); ties resolve by position so the run is deterministic.
    std::priority_queue<std::pair<double, std::size_t>> queue;
    double total = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        total += nodes[i].panel.error;
        queue.emplace(nodes[i].panel.error, i);
    }
    const std::size_t max_nodes = nodes.size() + kMaxBisections;
    bool converged = true;
    while (total > tol) {
        if (queue.empty() || nodes.size() + 2 > max_nodes) {
            converged = false;
            break;
        }
        const std::size_t i = queue.top().second;
        queue.pop();
        if (stuck(nodes[i])) {
            nodes[i].frozen = true;
            continue;
        }
        const Panel p = nodes[i].panel;
        const int depth = nodes[i].depth + 1;
        const double mid = 0.5 * (p.a + p.b);
        Node left{apply_rule(f, p.a, mid, rule, evals), depth, false};
        Node right{apply_rule(f, mid, p.b, rule, evals), depth, false};
        total += left.panel.error + right.panel.error - p.error;
        nodes[i] = left;
        queue.emplace(left.panel.error, i);
        nodes.push_back(right);
        queue.emplace(right.panel.error, nodes.size() - 1);
    }

    std::sort(nodes.begin(), nodes.end(), [](const Node& x, const Node& y) { return x.panel.a < y.panel.a; });
    std::vector<double> values;
    std::vector<double> errors;
    values.reserve(nodes.size());
    errors.reserve(nodes.size());
    for (const auto& n : nodes) {
        values.push_back(n.panel.value);
        errors.push_back(n.panel.error);
    }
    IntegralResult result;
    result.value = pairwise_sum(values);
    result.abs_error_est = pairwise_sum(errors);
    result.evaluations = evals;
    result.converged = converged && result.abs_error_est <= tol;
    return result;
}

}  // namespace

void PanelPolicy::validate() const {
    if (points_per_oscillation < 4) {
        throw DomainError("PanelPolicy: points_per_oscillation must be >= 4");
    }
    if (max_depth < 0 || max_depth > 60) throw DomainError("PanelPolicy: max_depth must be in [0, 60]");
    if (rule_order != 15 && rule_order != 21) throw DomainError("PanelPolicy: rule_order must be 15 or 21");
}

double zero_spacing(double t) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double l = std::log(std::max(t, two_pi * std::numbers::e) / two_pi);
    return two_pi / l;
}

double panel_width_cap(double b, const PanelPolicy& policy) {
    const double w = zero_spacing(b) * static_cast<double>(policy.rule_order) /
                     static_cast<double>(policy.points_per_oscillation);
    return std::min(1.0, w);
}

IntegralResult integrate(const Integrand& f, double a, double b, double tol, const PanelPolicy& policy) {
    if (!(tol > 0.0)) throw DomainError("integrate: tol must be positive");
    return run(f, a, b, policy, [tol](double) { return tol; });
}

IntegralResult integrate_relative(const Integrand& f, double a, double b, double rel_tol,
                                  const PanelPolicy& policy, double abs_floor) {
    if (!(rel_tol > 0.0)) throw DomainError("integrate: tol must be positive");
    return run(f, a, b, policy,
               [=](double first) { return std::max(rel_tol * std::abs(first), abs_floor); });
}

IntegralResult integrate_pieces_relative(const Integrand& f, std::span<const double> breakpoints,
                                         double rel_tol, const PanelPolicy& policy) {
    IntegralResult total;
    if (breakpoints.size() < 2) return total;
    std::vector<double> values;
    std::vector<double> errors;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i] <= breakpoints[i + 1])) throw DomainError("integrate: breakpoints must ascend");
        const auto piece = integrate_relative(f, breakpoints[i], breakpoints[i + 1], rel_tol, policy);
        values.push_back(piece.value);
        errors.push_back(piece.abs_error_est);
        total.evaluations += piece.evaluations;
        total.converged = total.converged && piece.converged;
    }
    total.value = pairwise_sum(values);
    total.abs_error_est = pairwise_sum(errors);
    return total;
}

std::vector<IntegralResult> integrate_cumulative(const Integrand& f, double a, std::span<const double> grid,
                                                 double tol, const PanelPolicy& policy) {
    std::vector<IntegralResult> out;
    if (grid.empty()) return out;
    if (grid.front() < a) throw DomainError("integrate_cumulative: grid[0] must be >= a");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] >= grid[i - 1])) throw DomainError("integrate_cumulative: grid must be ascending");
    }
    out.reserve(grid.size());
    const double span = grid.back() - a;
    auto cell_tol = [&](double lo, double hi) {
        return span > 0.0 ? std::max(tol * (hi - lo) / span, 1e-300) : tol;
    };

    IntegralResult running = integrate(f, a, grid.front(), cell_tol(a, grid.front()), policy);
    out.push_back(running);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const auto cell = integrate(f, grid[i - 1], grid[i], cell_tol(grid[i - 1], grid[i]), policy);
        running.value = running.value + cell.value;
        running.abs_error_est += cell.abs_error_est;
        running.evaluations += cell.evaluations;
        running.converged = running.converged && cell.converged;
        out.push_back(running);
    }
    return out;
}

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace ladderlab
