#pragma once

#include "ladderlab/quadrature.hpp"
#include "ladderlab/special_functions.hpp"

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ladderlab {

inline constexpr int kTableFormatVersion = 1;
inline constexpr double kMuCoefficient = 7.0;

// mu(y) = 7 y ln y, the smallest admissible upper limit.
double mu(double y);

// Directory for persisted Z^2 caches: $LADDERLAB_CACHE_DIR, else empty (no persistence).
std::string default_cache_dir();

// int_0^T Z^2 from a prefix table on the integer grid. The table is built in
// fixed 4096-unit chunks with a per-cell tolerance, so a value never depends
// on how far the cache happens to extend.
class CumulativeEnergy {
public:
    static std::shared_ptr<const CumulativeEnergy> build(double t_max, const EvalConfig& cfg = {},
                                                         const std::string& cache_dir = "");

    IntegralResult at(double T) const;
    double t_max() const { return static_cast<double>(prefix_.size() - 1); }
    const EvalConfig& config() const { return cfg_; }

    static constexpr long chunk = 4096;
    static constexpr double cell_tol = 1e-12;

private:
    EvalConfig cfg_;
    std::vector<double> prefix_;
    std::vector<double> error_;
    bool converged_ = true;
};

// Moments M_p = int_block Z^2 u^p dt, u = (t - c) / 16, on consecutive blocks
// [32 b, 32 b + 32]. The exponential kernel then reduces to a short series per
// block, which makes one kernel evaluation cost O(blocks) instead of a fresh
// oscillatory integral over [0, 14 x].
class KernelCache {
public:
    static std::shared_ptr<const KernelCache> build(double t_cover, const EvalConfig& cfg = {},
                                                    const std::string& cache_dir = "", int jobs = 1);

    double t_cover() const { return block_width * static_cast<double>(blocks()); }
    long blocks() const { return static_cast<long>(moments_.size() / moment_count); }

    // int_0^{min(mu(x), L)} Z^2 e^{-2t/x} dt, L = x ln(1/tail_eps) / 2 rounded up to a block edge.
    IntegralResult energy(double x, double tail_eps) const;
    // Moments M_0 .. M_23 of block b and the error estimate of M_0.
    std::span<const double> block_moments(long b) const;
    double block_error(long b) const { return error_.at(static_cast<std::size_t>(b)); }

    // d/dx of the same integral (upper limit held fixed).
    double derivative(double x, double tail_eps) const;

    static constexpr double block_width = 32.0;
    static constexpr int moment_count = 24;
    // Below this x the series is slow; both values come from direct quadrature.
    static constexpr double direct_below = 32.0;

private:
    EvalConfig cfg_;
    std::vector<double> moments_;  // blocks() x moment_count
    std::vector<double> error_;    // error estimate of M_0 per block
};

struct LadderOptions {
    double t_start = 100.0;
    double t_end = 1.0e4;
    double step = 10.0;
    double solve_tol = 1e-9;
    double tail_eps = 1e-12;
    int jobs = 1;
    std::string cache_dir;
    EvalConfig eval;

    void validate() const;
};

struct SolveFailure {
    double t = 0.0;
    std::string message;
};

struct Provenance {
    long kernel_evaluations = 0;
    double build_seconds = 0.0;
    std::string built_at;  // not persisted; saved files stay byte-identical across rebuilds
};

// Sampled phi_1 together with the energy E(t) = int_0^t Z^2 and the exact
// slope d phi_1 / dE at each knot. phi_1 is interpolated as a function of E:
// in t it inherits every oscillation of Z^2, in E it is as smooth as the
// kernel integral.
class LadderTable {
public:
    std::vector<double> t;
    std::vector<double> phi1;
    std::vector<double> energy;
    std::vector<double> slope;  // d phi_1 / dE

    double t_start = 0.0;
    double t_end = 0.0;
    double step = 0.0;
    double solve_tol = 0.0;
    double tail_eps = 0.0;
    double mu_coefficient = kMuCoefficient;
    int rs_correction_terms = 0;
    double rs_crossover = 0.0;
    bool partial = false;
    std::vector<SolveFailure> failures;
    Provenance provenance;

    std::shared_ptr<const CumulativeEnergy> energy_source;

    std::size_t size() const { return t.size(); }
    double front() const { return t.front(); }
    double back() const { return t.back(); }

    // Throws InvariantError naming the first violated invariant.
    void validate() const;

    void save(const std::string& path) const;
    // Loads, validates, and attaches a Z^2 prefix cache (from cache_dir, or rebuilt).
    static LadderTable load(const std::string& path, const std::string& cache_dir = "");
};

// Construction context: owns the Z^2 caches sized for opts.t_end.
class Ladder {
public:
    explicit Ladder(const LadderOptions& opts);

    IntegralResult cumulative_energy(double T) const;
    IntegralResult kernel_energy(double x) const;
    double kernel_derivative(double x) const;
    // phi(T), the root of kernel_energy(x) = cumulative_energy(T). phi_1 = phi / 2.
    double solve(double T) const;
    LadderTable build_table() const;
    LadderTable build_table(double t_start, double t_end, double step) const;

    const LadderOptions& options() const { return opts_; }
    std::shared_ptr<const CumulativeEnergy> energy_source() const { return energy_; }
    long kernel_evaluations() const;

private:
    LadderOptions opts_;
    std::shared_ptr<const CumulativeEnergy> energy_;
    std::shared_ptr<const KernelCache> kernel_;
    double x_cover_ = 0.0;
};

double eval_phi1(const LadderTable& table, double t);
// phi_1^k(t); k = 0 is the identity.
double eval_iterate(const LadderTable& table, double t, int k);
// s with phi_1(s) = y.
double phi1_inverse(const LadderTable& table, double y);
// [a, b] with phi_1([a, b]) = [T, T + U].
std::pair<double, double> preimage_interval(const LadderTable& table, double T, double U);
// E(t) through the table's attached prefix cache.
double table_energy(const LadderTable& table, double t);

}  // namespace ladderlab
