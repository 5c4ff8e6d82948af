#include "ladderlab/ladder.hpp"

#include "ladderlab/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace ladderlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Runs body(i) for i in [0, n) on `jobs` threads with a fixed interleaved
// assignment; results land in caller-owned slots, so output never depends on
// scheduling.
template <typename Body>
void parallel_for(long n, int jobs, Body body) {
    if (jobs <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) {
        pool.emplace_back([&, j] {
            try {
                for (long i = j; i < n; i += jobs) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(j)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// --- binary cache files ---------------------------------------------------

struct CacheHeader {
    char magic[8];
    std::int32_t version;
    std::int32_t rs_terms;
    double rs_crossover;
    double param_a;
    double param_b;
    std::int64_t count;
};

std::string cache_file(const std::string& dir, const char* stem, const EvalConfig& cfg) {
    std::ostringstream name;
    name << stem << "-rs" << cfg.rs_correction_terms << "-x" << short_fmt(cfg.rs_crossover) << ".bin";
    return (std::filesystem::path(dir) / name.str()).string();
}

bool read_cache(const std::string& path, const char* magic, const EvalConfig& cfg, double a, double b,
                std::int64_t& count, std::vector<double>& x, std::vector<double>& y, std::size_t per_entry) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    CacheHeader h{};
    in.read(reinterpret_cast<char*>(&h), sizeof h);
    if (!in || std::memcmp(h.magic, magic, 8) != 0 || h.version != 1 || h.rs_terms != cfg.rs_correction_terms ||
        h.rs_crossover != cfg.rs_crossover || h.param_a != a || h.param_b != b || h.count <= 0) {
        return false;
    }
    x.resize(static_cast<std::size_t>(h.count) * per_entry);
    y.resize(static_cast<std::size_t>(h.count));
    in.read(reinterpret_cast<char*>(x.data()), static_cast<std::streamsize>(x.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(y.data()), static_cast<std::streamsize>(y.size() * sizeof(double)));
    if (!in) return false;
    count = h.count;
    return true;
}

void write_cache(const std::string& path, const char* magic, const EvalConfig& cfg, double a, double b,
                 std::int64_t count, const std::vector<double>& x, const std::vector<double>& y) {
    std::error_code ec;
    std::filesystem::create_directories(std::filesystem::path(path).parent_path(), ec);
    const std::string tmp = path + ".tmp" + std::to_string(static_cast<long>(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return;  // persistence is best effort
        CacheHeader h{};
        std::memcpy(h.magic, magic, 8);
        h.version = 1;
        h.rs_terms = cfg.rs_correction_terms;
        h.rs_crossover = cfg.rs_crossover;
        h.param_a = a;
        h.param_b = b;
        h.count = count;
        out.write(reinterpret_cast<const char*>(&h), sizeof h);
        out.write(reinterpret_cast<const char*>(x.data()), static_cast<std::streamsize>(x.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(y.data()), static_cast<std::streamsize>(y.size() * sizeof(double)));
        if (!out) {
            std::filesystem::remove(tmp, ec);
            return;
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) std::filesystem::remove(tmp, ec);
}

// --- Z^2 block moments -----------------------------------------------------

constexpr int kNodes = 21;
constexpr double kPanel = 0.5;
constexpr int kPanelsPerBlock = static_cast<int>(KernelCache::block_width / kPanel);
// Blocks ending below this height evaluate Z directly.
constexpr double kMarchFrom = 512.0;

struct MomentRule {
    std::array<double, kNodes> offset{};  // node position inside a panel, in [0, kPanel]
    std::array<double, kNodes> kronrod{};  // weights scaled to the panel
    std::array<double, kNodes> gauss{};
};

const MomentRule& moment_rule() {
    static const MomentRule rule = [] {
        using boost::math::quadrature::gauss;
        using boost::math::quadrature::gauss_kronrod;
        const auto& kx = gauss_kronrod<double, kNodes>::abscissa();
        const auto& kw = gauss_kronrod<double, kNodes>::weights();
        const auto& gx = gauss<double, kNodes / 2>::abscissa();
        const auto& gw = gauss<double, kNodes / 2>::weights();
        auto gauss_weight_at = [&](double x) {
            for (std::size_t j = 0; j < gx.size(); ++j) {
                if (std::abs(gx[j] - x) < 1e-14) return gw[j];
            }
            return 0.0;
        };
        MomentRule r;
        const double half = 0.5 * kPanel;
        int j = 0;
        for (std::size_t i = kx.size(); i-- > 1;) {
            r.offset[j] = half * (1.0 - kx[i]);
            r.kronrod[j] = half * kw[i];
            r.gauss[j] = half * gauss_weight_at(kx[i]);
            ++j;
        }
        for (std::size_t i = 0; i < kx.size(); ++i) {
            r.offset[j] = half * (1.0 + kx[i]);
            r.kronrod[j] = half * kw[i];
            r.gauss[j] = half * gauss_weight_at(kx[i]);
            ++j;
        }
        return r;
    }();
    return rule;
}

// e^{-i d ln k} for every node offset d, and the per-panel step e^{-i kPanel ln k}.
struct MarchTables {
    long k_max = 0;
    std::vector<double> node_re, node_im;  // [j * (k_max + 1) + k]
    std::vector<double> step_re, step_im;
    std::vector<double> inv_sqrt;
};

const MarchTables& march_tables() {
    static const MarchTables tab = [] {
        MarchTables t;
        t.k_max = static_cast<long>(std::sqrt(kMaxHeight / kTwoPi)) + 2;
        const auto stride = static_cast<std::size_t>(t.k_max + 1);
        t.node_re.assign(kNodes * stride, 0.0);
        t.node_im.assign(kNodes * stride, 0.0);
        t.step_re.assign(stride, 0.0);
        t.step_im.assign(stride, 0.0);
        t.inv_sqrt.assign(stride, 0.0);
        const auto& rule = moment_rule();
        for (long k = 1; k <= t.k_max; ++k) {
            const long double lk = std::log(static_cast<long double>(k));
            for (int j = 0; j < kNodes; ++j) {
                const long double ph = static_cast<long double>(rule.offset[j]) * lk;
                t.node_re[j * stride + k] = static_cast<double>(std::cos(ph));
                t.node_im[j * stride + k] = static_cast<double>(-std::sin(ph));
            }
            const long double ph = static_cast<long double>(kPanel) * lk;
            t.step_re[k] = static_cast<double>(std::cos(ph));
            t.step_im[k] = static_cast<double>(-std::sin(ph));
            t.inv_sqrt[k] = 1.0 / std::sqrt(static_cast<double>(k));
        }
        return t;
    }();
    return tab;
}

long rs_length(double t) { return static_cast<long>(std::floor(std::sqrt(t / kTwoPi))); }

// Z at the 21 nodes of each panel of the block, by direct evaluation or by
// marching the main-sum phases panel to panel from an exactly reduced start.
void block_z_values(long b, const EvalConfig& cfg, std::vector<double>& z) {
    const auto& rule = moment_rule();
    const double a0 = KernelCache::block_width * static_cast<double>(b);
    z.assign(static_cast<std::size_t>(kPanelsPerBlock) * kNodes, 0.0);

    if (a0 + KernelCache::block_width <= kMarchFrom) {
        for (int p = 0; p < kPanelsPerBlock; ++p) {
            const double a = a0 + kPanel * p;
            for (int j = 0; j < kNodes; ++j) z[p * kNodes + j] = hardy_z(a + rule.offset[j], cfg);
        }
        return;
    }

    const auto& tab = march_tables();
    const auto stride = static_cast<std::size_t>(tab.k_max + 1);
    const long n_top = rs_length(a0 + KernelCache::block_width) + 1;
    std::vector<double> pr(static_cast<std::size_t>(n_top + 1), 0.0);
    std::vector<double> pi(static_cast<std::size_t>(n_top + 1), 0.0);
    for (long k = 1; k <= n_top; ++k) {
        const double ph = detail::t_log_k_mod_two_pi(a0, k);
        pr[k] = tab.inv_sqrt[k] * std::cos(ph);
        pi[k] = -tab.inv_sqrt[k] * std::sin(ph);
    }

    for (int p = 0; p < kPanelsPerBlock; ++p) {
        const double a = a0 + kPanel * p;
        const long n_lo = rs_length(a);
        for (int j = 0; j < kNodes; ++j) {
            const long double t_exact = static_cast<long double>(a) + static_cast<long double>(rule.offset[j]);
            const double t = static_cast<double>(t_exact);
            const double* dre = &tab.node_re[j * stride];
            const double* dim = &tab.node_im[j * stride];
            double re[4] = {0.0, 0.0, 0.0, 0.0};
            double im[4] = {0.0, 0.0, 0.0, 0.0};
            long k = 1;
            for (; k + 3 <= n_lo; k += 4) {
                for (int u = 0; u < 4; ++u) {
                    re[u] += pr[k + u] * dre[k + u] - pi[k + u] * dim[k + u];
                    im[u] += pr[k + u] * dim[k + u] + pi[k + u] * dre[k + u];
                }
            }
            for (; k <= n_lo; ++k) {
                re[0] += pr[k] * dre[k] - pi[k] * dim[k];
                im[0] += pr[k] * dim[k] + pi[k] * dre[k];
            }
            const long n_here = rs_length(t);
            for (k = n_lo + 1; k <= n_here; ++k) {
                re[0] += pr[k] * dre[k] - pi[k] * dim[k];
                im[0] += pr[k] * dim[k] + pi[k] * dre[k];
            }
            const double sre = (re[0] + re[1]) + (re[2] + re[3]);
            const double sim = (im[0] + im[1]) + (im[2] + im[3]);
            const double th = detail::theta_mod_two_pi(t_exact);
            z[p * kNodes + j] = 2.0 * (std::cos(th) * sre - std::sin(th) * sim) +
                                detail::rs_remainder(t, cfg.rs_correction_terms);
        }
        for (long k = 1; k <= n_top; ++k) {
            const double r = pr[k] * tab.step_re[k] - pi[k] * tab.step_im[k];
            const double i = pr[k] * tab.step_im[k] + pi[k] * tab.step_re[k];
            pr[k] = r;
            pi[k] = i;
        }
    }
}

void compute_block(long b, const EvalConfig& cfg, double* moments, double& error) {
    const auto& rule = moment_rule();
    std::vector<double> z;
    block_z_values(b, cfg, z);
    const double h = 0.5 * KernelCache::block_width;
    std::fill(moments, moments + KernelCache::moment_count, 0.0);
    error = 0.0;
    for (int p = 0; p < kPanelsPerBlock; ++p) {
        std::array<double, KernelCache::moment_count> panel{};
        double gauss = 0.0;
        double resasc = 0.0;
        for (int j = 0; j < kNodes; ++j) {
            const double f = z[p * kNodes + j] * z[p * kNodes + j];
            const double u = (kPanel * p - h + rule.offset[j]) / h;
            double up = rule.kronrod[j] * f;
            for (int q = 0; q < KernelCache::moment_count; ++q) {
                panel[q] += up;
                up *= u;
            }
            gauss += rule.gauss[j] * f;
        }
        const double mean = panel[0] / kPanel;
        for (int j = 0; j < kNodes; ++j) {
            const double f = z[p * kNodes + j] * z[p * kNodes + j];
            resasc += rule.kronrod[j] * std::abs(f - mean);
        }
        double err = std::abs(panel[0] - gauss);
        if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
        err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * panel[0]);
        for (int q = 0; q < KernelCache::moment_count; ++q) moments[q] += panel[q];
        error += err;
    }
}

}  // namespace

double mu(double y) {
    if (!(y > std::numbers::e)) throw DomainError("mu: requires y > e, got " + short_fmt(y));
    return kMuCoefficient * y * std::log(y);
}

std::string default_cache_dir() {
    const char* env = std::getenv("LADDERLAB_CACHE_DIR");
    return env ? std::string(env) : std::string();
}

// --- CumulativeEnergy ------------------------------------------------------

std::shared_ptr<const CumulativeEnergy> CumulativeEnergy::build(double t_max, const EvalConfig& cfg,
                                                                const std::string& cache_dir) {
    cfg.validate();
    if (!(t_max >= 0.0) || t_max > kMaxHeight) throw DomainError("CumulativeEnergy: t_max out of range");
    const long chunks = std::max<long>(1, static_cast<long>(std::ceil(t_max / static_cast<double>(chunk))));

    auto out = std::make_shared<CumulativeEnergy>();
    out->cfg_ = cfg;
    const std::string path = cache_dir.empty() ? std::string() : cache_file(cache_dir, "z2-prefix", cfg);

    std::int64_t have = 0;
    std::vector<double> data;
    std::vector<double> conv;
    if (!path.empty() && read_cache(path, "LLPREFX1", cfg, static_cast<double>(chunk), cell_tol, have, data, conv, 2)) {
        const auto n = static_cast<std::size_t>(have);
        out->prefix_.assign(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n));
        out->error_.assign(data.begin() + static_cast<std::ptrdiff_t>(n), data.end());
        out->converged_ = std::all_of(conv.begin(), conv.end(), [](double c) { return c != 0.0; });
    } else {
        out->prefix_ = {0.0};
        out->error_ = {0.0};
    }
    const long have_chunks = static_cast<long>(out->prefix_.size() - 1) / chunk;
    if (have_chunks >= chunks) return out;

    auto z2 = [&cfg](double t) {
        const double z = hardy_z(t, cfg);
        return z * z;
    };
    std::vector<double> grid(static_cast<std::size_t>(chunk));
    for (long c = have_chunks; c < chunks; ++c) {
        const double a = static_cast<double>(c * chunk);
        for (long i = 0; i < chunk; ++i) grid[static_cast<std::size_t>(i)] = a + static_cast<double>(i + 1);
        // Per-cell budget is tol * 1 / chunk = cell_tol exactly.
        const auto local = integrate_cumulative(z2, a, grid, cell_tol * static_cast<double>(chunk));
        const double base = out->prefix_.back();
        const double base_err = out->error_.back();
        for (const auto& r : local) {
            out->prefix_.push_back(base + r.value);
            out->error_.push_back(base_err + r.abs_error_est);
            out->converged_ = out->converged_ && r.converged;
        }
    }
    if (!path.empty()) {
        std::vector<double> blob = out->prefix_;
        blob.insert(blob.end(), out->error_.begin(), out->error_.end());
        std::vector<double> flags(out->prefix_.size(), out->converged_ ? 1.0 : 0.0);
        // The second array holds convergence flags; error_ rides in the first.
        write_cache(path, "LLPREFX1", cfg, static_cast<double>(chunk), cell_tol,
                    static_cast<std::int64_t>(out->prefix_.size()), blob, flags);
    }
    return out;
}

IntegralResult CumulativeEnergy::at(double T) const {
    if (!(T >= 0.0) || T > t_max()) {
        throw DomainError("cumulative_energy: T = " + short_fmt(T) + " outside the cached range [0, " +
                          short_fmt(t_max()) + "]");
    }
    const auto i = static_cast<std::size_t>(std::floor(T));
    IntegralResult r;
    r.value = prefix_[i];
    r.abs_error_est = error_[i];
    r.converged = converged_;
    const double lo = static_cast<double>(i);
    if (T > lo) {
        auto z2 = [this](double t) {
            const double z = hardy_z(t, cfg_);
            return z * z;
        };
        // One fixed Kronrod panel: the result is smooth in T, which the
        // interpolated ladder and everything composed with it rely on.
        double err = 0.0;
        r.value += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(z2, lo, T, 0, 0.0, &err);
        r.abs_error_est += err;
        r.evaluations = 31;
    }
    return r;
}

// --- KernelCache -----------------------------------------------------------

std::shared_ptr<const KernelCache> KernelCache::build(double t_cover, const EvalConfig& cfg,
                                                      const std::string& cache_dir, int jobs) {
    cfg.validate();
    if (!(t_cover > 0.0) || t_cover > kMaxHeight) throw DomainError("KernelCache: coverage out of range");
    const long need = static_cast<long>(std::ceil(t_cover / block_width));

    auto out = std::make_shared<KernelCache>();
    out->cfg_ = cfg;
    const std::string path = cache_dir.empty() ? std::string() : cache_file(cache_dir, "z2-moments", cfg);
    std::int64_t have = 0;
    if (!path.empty()) {
        if (!read_cache(path, "LLMOMNT1", cfg, block_width, moment_count, have, out->moments_, out->error_,
                        moment_count)) {
            out->moments_.clear();
            out->error_.clear();
            have = 0;
        }
    }
    if (have >= need) return out;

    out->moments_.resize(static_cast<std::size_t>(need) * moment_count);
    out->error_.resize(static_cast<std::size_t>(need));
    const long first = static_cast<long>(have);
    parallel_for(need - first, jobs, [&](long i) {
        const long b = first + i;
        compute_block(b, cfg, &out->moments_[static_cast<std::size_t>(b) * moment_count],
                      out->error_[static_cast<std::size_t>(b)]);
    });
    if (!path.empty()) write_cache(path, "LLMOMNT1", cfg, block_width, moment_count, need, out->moments_, out->error_);
    return out;
}

namespace {

double tail_limit(double x, double tail_eps) { return std::min(mu(x), 0.5 * x * std::log(1.0 / tail_eps)); }

// sum_p m[p + shift] y^p / p!
double moment_series(const double* m, double y, int shift) {
    const int top = KernelCache::moment_count - 1 - shift;
    double acc = m[top + shift];
    for (int p = top - 1; p >= 0; --p) acc = m[p + shift] + acc * y / static_cast<double>(p + 1);
    return acc;
}

IntegralResult kernel_direct(double x, double tail_eps, const EvalConfig& cfg, bool derivative) {
    const double s = 2.0 / x;
    auto f = [&](double t) {
        const double z = hardy_z(t, cfg);
        const double w = std::exp(-s * t);
        return derivative ? z * z * w * 2.0 * t / (x * x) : z * z * w;
    };
    return integrate_relative(f, 0.0, tail_limit(x, tail_eps), 1e-13);
}

}  // namespace

std::span<const double> KernelCache::block_moments(long b) const {
    if (b < 0 || b >= blocks()) throw DomainError("KernelCache: block index out of range");
    return {&moments_[static_cast<std::size_t>(b) * moment_count], static_cast<std::size_t>(moment_count)};
}

IntegralResult KernelCache::energy(double x, double tail_eps) const {
    if (!(x > std::numbers::e)) throw DomainError("kernel_energy: requires x > e, got " + short_fmt(x));
    if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw DomainError("kernel_energy: tail_eps must lie in (0, 1)");
    if (x < direct_below) return kernel_direct(x, tail_eps, cfg_, false);

    const double limit = tail_limit(x, tail_eps);
    const long nb = static_cast<long>(std::ceil(limit / block_width));
    if (nb > blocks()) {
        throw ConvergenceError("kernel_energy: x = " + short_fmt(x) + " needs Z^2 moments up to t = " +
                               short_fmt(block_width * static_cast<double>(nb)) + ", cache covers " +
                               short_fmt(t_cover()));
    }
    const double s = 2.0 / x;
    const double h = 0.5 * block_width;
    const double y = -s * h;
    std::vector<double> parts(static_cast<std::size_t>(nb));
    std::vector<double> errs(static_cast<std::size_t>(nb));
    for (long b = 0; b < nb; ++b) {
        const double c = block_width * static_cast<double>(b) + h;
        const double w = std::exp(-s * c);
        parts[static_cast<std::size_t>(b)] = w * moment_series(&moments_[static_cast<std::size_t>(b) * moment_count], y, 0);
        errs[static_cast<std::size_t>(b)] = w * std::exp(s * h) * error_[static_cast<std::size_t>(b)];
    }
    IntegralResult r;
    r.value = pairwise_sum(parts);
    r.abs_error_est = pairwise_sum(errs) + tail_eps * r.value;
    r.evaluations = nb * kPanelsPerBlock * kNodes;
    r.converged = true;
    return r;
}

double KernelCache::derivative(double x, double tail_eps) const {
    if (!(x > std::numbers::e)) throw DomainError("kernel_derivative: requires x > e, got " + short_fmt(x));
    if (x < direct_below) return kernel_direct(x, tail_eps, cfg_, true).value;
    const double limit = tail_limit(x, tail_eps);
    const long nb = static_cast<long>(std::ceil(limit / block_width));
    if (nb > blocks()) throw ConvergenceError("kernel_derivative: x = " + short_fmt(x) + " exceeds the moment cache");
    const double s = 2.0 / x;
    const double h = 0.5 * block_width;
    const double y = -s * h;
    std::vector<double> parts(static_cast<std::size_t>(nb));
    for (long b = 0; b < nb; ++b) {
        const double c = block_width * static_cast<double>(b) + h;
        const double* m = &moments_[static_cast<std::size_t>(b) * moment_count];
        parts[static_cast<std::size_t>(b)] = std::exp(-s * c) * (c * moment_series(m, y, 0) + h * moment_series(m, y, 1));
    }
    return 2.0 / (x * x) * pairwise_sum(parts);
}

// --- Ladder ----------------------------------------------------------------

void LadderOptions::validate() const {
    eval.validate();
    if (!(t_start >= 100.0)) throw DomainError("ladder: t_start must be >= 100");
    if (!(t_end >= t_start)) throw DomainError("ladder: t_end must be >= t_start");
    if (!(step > 0.0 && step <= 10.0)) throw DomainError("ladder: step must lie in (0, 10]");
    if (!(solve_tol > 0.0 && solve_tol < 1e-3)) throw DomainError("ladder: solve_tol must lie in (0, 1e-3)");
    if (!(tail_eps > 0.0 && tail_eps <= 1e-6)) throw DomainError("ladder: tail_eps must lie in (0, 1e-6]");
    if (jobs < 1) throw DomainError("ladder: jobs must be >= 1");
    if (2.0 * t_end * 0.5 * std::log(1.0 / tail_eps) > kMaxHeight) {
        throw DomainError("ladder: t_end too large for the supported Z range");
    }
}

namespace {
std::atomic<long> g_kernel_evals{0};
}

Ladder::Ladder(const LadderOptions& opts) : opts_(opts) {
    opts_.validate();
    energy_ = CumulativeEnergy::build(std::ceil(opts_.t_end) + 1.0, opts_.eval, opts_.cache_dir);
    // phi(T) < 2 T, so the initial bracket [T / ln T, 2 T] is enough; an expansion past it reports failure.
    x_cover_ = 2.0 * opts_.t_end;
    const double t_cover = 0.5 * x_cover_ * std::log(1.0 / opts_.tail_eps) + KernelCache::block_width;
    kernel_ = KernelCache::build(t_cover, opts_.eval, opts_.cache_dir, opts_.jobs);
}

IntegralResult Ladder::cumulative_energy(double T) const { return energy_->at(T); }

IntegralResult Ladder::kernel_energy(double x) const {
    g_kernel_evals.fetch_add(1, std::memory_order_relaxed);
    return kernel_->energy(x, opts_.tail_eps);
}

double Ladder::kernel_derivative(double x) const { return kernel_->derivative(x, opts_.tail_eps); }

long Ladder::kernel_evaluations() const { return g_kernel_evals.load(); }

double Ladder::solve(double T) const {
    if (!(T >= opts_.t_start)) {
        throw DomainError("solve_ladder: T = " + short_fmt(T) + " is below t_start = " + short_fmt(opts_.t_start));
    }
    const double target = energy_->at(T).value;
    auto f = [&](double x) { return kernel_energy(x).value - target; };

    double lo = T / std::log(T);
    double hi = 2.0 * T;
    double flo = f(lo);
    double fhi = f(hi);
    while (fhi < 0.0) {
        if (2.0 * hi > x_cover_) {
            throw ConvergenceError("solve_ladder: bracket expansion failed at T = " + short_fmt(T) + ", last bracket [" +
                                   short_fmt(lo) + ", " + short_fmt(hi) + "]");
        }
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi = f(hi);
    }
    while (flo > 0.0) {
        if (0.5 * lo <= std::numbers::e) {
            throw ConvergenceError("solve_ladder: bracket expansion failed at T = " + short_fmt(T) + ", last bracket [" +
                                   short_fmt(lo) + ", " + short_fmt(hi) + "]");
        }
        hi = lo;
        fhi = flo;
        lo *= 0.5;
        flo = f(lo);
    }
    if (!(flo < fhi)) {
        throw InvariantError("solve_ladder: kernel_energy is not increasing on [" + short_fmt(lo) + ", " + short_fmt(hi) +
                             "] at T = " + short_fmt(T));
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;

    const double tol = opts_.solve_tol;
    auto close_enough = [tol](double a, double b) { return std::abs(b - a) <= tol * std::min(std::abs(a), std::abs(b)); };
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, close_enough, iters);
    if (iters >= 200) throw ConvergenceError("solve_ladder: root search did not converge at T = " + short_fmt(T));
    const double x = 0.5 * (r.first + r.second);
    if (!(x > lo * (1.0 - 1e-15) && x < hi * (1.0 + 1e-15))) throw InvariantError("solve_ladder: root left its bracket");
    return x;
}

LadderTable Ladder::build_table() const { return build_table(opts_.t_start, opts_.t_end, opts_.step); }

LadderTable Ladder::build_table(double t_start, double t_end, double step) const {
    if (!(t_start >= 100.0)) throw DomainError("build_table: t_start must be >= 100");
    if (!(t_start >= opts_.t_start)) throw DomainError("build_table: t_start below the context's t_start");
    if (!(t_end >= t_start)) throw DomainError("build_table: t_end must be >= t_start");
    if (!(t_end <= opts_.t_end)) throw DomainError("build_table: t_end beyond the context's cache range");
    if (!(step > 0.0 && step <= 10.0)) throw DomainError("build_table: step must lie in (0, 10]");

    const auto started = std::chrono::steady_clock::now();
    const long evals_before = kernel_evaluations();
    const long n = static_cast<long>(std::floor((t_end - t_start) / step * (1.0 + 1e-12))) + 1;

    std::vector<double> ts(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) ts[static_cast<std::size_t>(i)] = t_start + step * static_cast<double>(i);
    std::vector<double> phi(ts.size(), 0.0), energy(ts.size(), 0.0), slope(ts.size(), 0.0);
    std::vector<std::string> failed(ts.size());

    parallel_for(n, opts_.jobs, [&](long i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            const double x = solve(ts[k]);
            phi[k] = 0.5 * x;
            energy[k] = energy_->at(ts[k]).value;
            slope[k] = 0.5 / kernel_derivative(x);
        } catch (const std::exception& e) {
            failed[k] = e.what();
        }
    });

    LadderTable table;
    table.t_start = t_start;
    table.t_end = t_end;
    table.step = step;
    table.solve_tol = opts_.solve_tol;
    table.tail_eps = opts_.tail_eps;
    table.rs_correction_terms = opts_.eval.rs_correction_terms;
    table.rs_crossover = opts_.eval.rs_crossover;
    table.energy_source = energy_;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        if (!failed[k].empty()) {
            table.partial = true;
            table.failures.push_back({ts[k], failed[k]});
            continue;
        }
        table.t.push_back(ts[k]);
        table.phi1.push_back(phi[k]);
        table.energy.push_back(energy[k]);
        table.slope.push_back(slope[k]);
    }
    table.provenance.kernel_evaluations = kernel_evaluations() - evals_before;
    table.provenance.build_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    {
        const std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        table.provenance.built_at = buf;
    }
    if (!table.t.empty()) table.validate();
    return table;
}

// --- LadderTable -----------------------------------------------------------

void LadderTable::validate() const {
    const std::size_t n = t.size();
    if (phi1.size() != n || energy.size() != n || slope.size() != n) {
        throw InvariantError("ladder table: column lengths differ");
    }
    if (n == 0 && !partial) throw InvariantError("ladder table: no rows");
    for (std::size_t i = 0; i < n; ++i) {
        const std::string at = " at row " + std::to_string(i) + " (t = " + short_fmt(t[i]) + ")";
        if (!std::isfinite(t[i]) || !std::isfinite(phi1[i]) || !std::isfinite(energy[i]) || !std::isfinite(slope[i])) {
            throw InvariantError("ladder table: non-finite entry" + at);
        }
        if (!(slope[i] > 0.0)) throw InvariantError("ladder table: slope d phi1/dE not positive" + at);
        if (t[i] >= t_start && !(phi1[i] < t[i])) throw InvariantError("ladder table: phi1 not below the diagonal" + at);
        if (i > 0) {
            if (!(t[i] > t[i - 1])) throw InvariantError("ladder table: t not strictly increasing" + at);
            if (!(phi1[i] > phi1[i - 1])) throw InvariantError("ladder table: phi1 not strictly increasing" + at);
            if (!(energy[i] > energy[i - 1])) throw InvariantError("ladder table: energy not strictly increasing" + at);
        }
    }
}

void LadderTable::save(const std::string& path) const {
    validate();
    std::ostringstream out;
    out << "# ladderlab ladder table\n";
    out << "format_version=" << kTableFormatVersion << "\n";
    out << "t_start=" << fmt(t_start) << "\n";
    out << "t_end=" << fmt(t_end) << "\n";
    out << "step=" << fmt(step) << "\n";
    out << "solve_tol=" << fmt(solve_tol) << "\n";
    out << "mu_coefficient=" << fmt(mu_coefficient) << "\n";
    out << "tail_eps=" << fmt(tail_eps) << "\n";
    out << "rs_correction_terms=" << rs_correction_terms << "\n";
    out << "rs_crossover=" << fmt(rs_crossover) << "\n";
    out << "partial=" << (partial ? 1 : 0) << "\n";
    out << "rows=" << t.size() << "\n";
    for (const auto& f : failures) out << "# failed t=" << fmt(f.t) << ": " << f.message << "\n";
    out << "# t,phi1,energy,dphi1_dE\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << fmt(t[i]) << ',' << fmt(phi1[i]) << ',' << fmt(energy[i]) << ',' << fmt(slope[i]) << '\n';
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) throw FormatError("ladder table: cannot write " + path);
        f << out.str();
        if (!f) throw FormatError("ladder table: write failed for " + path);
    }
    std::filesystem::rename(tmp, path);
}

namespace {

double parse_number(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    const auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) throw FormatError("ladder table: bad number for " + what + ": '" + s + "'");
    return v;
}

}  // namespace

LadderTable LadderTable::load(const std::string& path, const std::string& cache_dir) {
    std::ifstream in(path);
    if (!in) throw FormatError("ladder table: cannot open " + path);
    std::map<std::string, std::string> header;
    LadderTable table;
    std::string line;
    bool in_rows = false;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# t,", 0) == 0) in_rows = true;
            continue;
        }
        if (!in_rows) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw FormatError("ladder table: malformed header line " + std::to_string(line_no));
            header[line.substr(0, eq)] = line.substr(eq + 1);
            continue;
        }
        std::array<double, 4> v{};
        std::size_t pos = 0;
        for (int c = 0; c < 4; ++c) {
            const auto comma = line.find(',', pos);
            const bool last = c == 3;
            if (last != (comma == std::string::npos)) {
                throw FormatError("ladder table: expected 4 columns on line " + std::to_string(line_no));
            }
            v[c] = parse_number(line.substr(pos, last ? std::string::npos : comma - pos), "line " + std::to_string(line_no));
            pos = comma + 1;
        }
        table.t.push_back(v[0]);
        table.phi1.push_back(v[1]);
        table.energy.push_back(v[2]);
        table.slope.push_back(v[3]);
    }
    auto need = [&](const char* key) {
        const auto it = header.find(key);
        if (it == header.end()) throw FormatError(std::string("ladder table: missing header key ") + key);
        return it->second;
    };
    const double version = parse_number(need("format_version"), "format_version");
    if (version != kTableFormatVersion) {
        throw FormatError("ladder table: format version " + need("format_version") + " is not supported (expected " +
                          std::to_string(kTableFormatVersion) + ")");
    }
    table.t_start = parse_number(need("t_start"), "t_start");
    table.t_end = parse_number(need("t_end"), "t_end");
    table.step = parse_number(need("step"), "step");
    table.solve_tol = parse_number(need("solve_tol"), "solve_tol");
    table.mu_coefficient = parse_number(need("mu_coefficient"), "mu_coefficient");
    table.tail_eps = parse_number(need("tail_eps"), "tail_eps");
    table.rs_correction_terms = static_cast<int>(parse_number(need("rs_correction_terms"), "rs_correction_terms"));
    table.rs_crossover = parse_number(need("rs_crossover"), "rs_crossover");
    table.partial = parse_number(need("partial"), "partial") != 0.0;
    const double rows = parse_number(need("rows"), "rows");
    if (table.mu_coefficient != kMuCoefficient) {
        throw FormatError("ladder table: mu coefficient " + need("mu_coefficient") + " differs from 7");
    }
    if (rows != static_cast<double>(table.t.size())) {
        throw FormatError("ladder table: header says " + need("rows") + " rows, file has " + std::to_string(table.t.size()));
    }
    table.validate();

    EvalConfig cfg;
    cfg.rs_correction_terms = table.rs_correction_terms;
    cfg.rs_crossover = table.rs_crossover;
    table.energy_source = CumulativeEnergy::build(std::ceil(table.back()) + 1.0, cfg, cache_dir);
    for (std::size_t i : {std::size_t{0}, table.size() / 2, table.size() - 1}) {
        const double e = table.energy_source->at(table.t[i]).value;
        if (std::abs(e - table.energy[i]) > 1e-10 * e) {
            throw InvariantError("ladder table: energy column disagrees with the Z^2 prefix at t = " + short_fmt(table.t[i]));
        }
    }
    return table;
}

// --- evaluation ------------------------------------------------------------

namespace {

void require_energy(const LadderTable& table) {
    if (!table.energy_source) throw DomainError("ladder table has no attached Z^2 prefix cache");
    if (table.t.empty()) throw DomainError("ladder table is empty");
}

// Cubic Hermite on [e0, e1] with Fritsch-Carlson limited end slopes.
struct Cell {
    double e0, e1, y0, y1, m0, m1;

    double operator()(double e) const {
        const double h = e1 - e0;
        const double s = (e - e0) / h;
        const double s2 = s * s;
        const double s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * m1;
    }
};

Cell make_cell(const LadderTable& table, std::size_t i) {
    Cell c{table.energy[i], table.energy[i + 1], table.phi1[i], table.phi1[i + 1], table.slope[i], table.slope[i + 1]};
    const double delta = (c.y1 - c.y0) / (c.e1 - c.e0);
    const double a = c.m0 / delta;
    const double b = c.m1 / delta;
    const double r = a * a + b * b;
    if (r > 9.0) {
        const double tau = 3.0 / std::sqrt(r);
        c.m0 = tau * a * delta;
        c.m1 = tau * b * delta;
    }
    return c;
}

std::size_t cell_index(const std::vector<double>& xs, double x) {
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto i = static_cast<std::size_t>(it - xs.begin());
    return std::min(i == 0 ? 0 : i - 1, xs.size() - 2);
}

std::string domain_text(const LadderTable& table) {
    return "[" + short_fmt(table.front()) + ", " + short_fmt(table.back()) + "]";
}

}  // namespace

double table_energy(const LadderTable& table, double t) {
    require_energy(table);
    return table.energy_source->at(t).value;
}

double eval_phi1(const LadderTable& table, double t) {
    require_energy(table);
    if (!(t >= table.front() && t <= table.back())) {
        throw DomainError("eval_phi1: t = " + short_fmt(t) + " outside the table domain " + domain_text(table));
    }
    if (table.size() == 1) return table.phi1[0];
    const std::size_t i = cell_index(table.t, t);
    if (t == table.t[i]) return table.phi1[i];
    if (t == table.t[i + 1]) return table.phi1[i + 1];
    const Cell c = make_cell(table, i);
    const double e = std::clamp(table.energy_source->at(t).value, c.e0, c.e1);
    return std::clamp(c(e), c.y0, c.y1);
}

double eval_iterate(const LadderTable& table, double t, int k) {
    if (k < 0) throw DomainError("eval_iterate: k must be >= 0");
    double v = t;
    for (int d = 1; d <= k; ++d) {
        if (!(v >= table.front() && v <= table.back())) {
            throw DomainError("eval_iterate: depth " + std::to_string(d) + " needs phi1 at " + short_fmt(v) +
                              ", outside the table domain " + domain_text(table));
        }
        v = eval_phi1(table, v);
    }
    return v;
}

double phi1_inverse(const LadderTable& table, double y) {
    require_energy(table);
    if (!(y >= table.phi1.front() && y <= table.phi1.back())) {
        throw DomainError("phi1_inverse: " + short_fmt(y) + " outside the attained range [" +
                          short_fmt(table.phi1.front()) + ", " + short_fmt(table.phi1.back()) + "]");
    }
    if (table.size() == 1) return table.t[0];
    const std::size_t i = cell_index(table.phi1, y);
    if (y == table.phi1[i]) return table.t[i];
    if (y == table.phi1[i + 1]) return table.t[i + 1];

    const Cell c = make_cell(table, i);
    boost::uintmax_t iters = 200;
    auto g = [&](double e) { return c(e) - y; };
    const auto er = boost::math::tools::toms748_solve(g, c.e0, c.e1, c.y0 - y, c.y1 - y,
                                                      boost::math::tools::eps_tolerance<double>(52), iters);
    const double target = 0.5 * (er.first + er.second);

    // Narrow to a unit cell of the prefix grid, where E is a cached knot value.
    const auto& src = *table.energy_source;
    double lo = table.t[i];
    double hi = table.t[i + 1];
    const double k_lo = std::ceil(lo);
    const double k_hi = std::floor(hi);
    if (k_lo <= k_hi) {
        if (src.at(k_lo).value > target) {
            hi = k_lo;
        } else if (src.at(k_hi).value <= target) {
            lo = k_hi;
        } else {
            double a = k_lo;
            double b = k_hi;
            while (b - a > 1.0) {
                const double m = std::floor(0.5 * (a + b));
                (src.at(m).value <= target ? a : b) = m;
            }
            lo = a;
            hi = b;
        }
    }

    auto f = [&](double t) { return src.at(t).value - target; };
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo >= 0.0) return lo;
    if (fhi <= 0.0) return hi;
    iters = 200;
    const auto tr = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (tr.first + tr.second);
}

std::pair<double, double> preimage_interval(const LadderTable& table, double T, double U) {
    if (!(U >= 0.0)) throw DomainError("preimage_interval: U must be >= 0");
    const double a = phi1_inverse(table, T);
    const double b = U == 0.0 ? a : phi1_inverse(table, T + U);
    return {a, b};
}

}  // namespace ladderlab
