#pragma once

#include "ladderlab/config.hpp"
#include "ladderlab/functionals.hpp"
#include "ladderlab/ladder.hpp"

#include <memory>
#include <string>
#include <vector>

namespace ladderlab {

// pass/fail come from the band; "recorded" rows carry a measurement with no
// band (undefined constants); "skip" rows were refused before computing.
enum class Status { pass, fail, skip, recorded };
const char* status_name(Status s);

struct VerificationReport {
    std::string claim_id;
    std::string variant;  // sub-case within a claim, e.g. "cauchy" or "trend"
    IntervalSpec spec;
    SignalParams params;
    double lhs = 0.0;
    double rhs_scale = 0.0;
    double ratio = 0.0;  // lhs / rhs_scale
    double empirical_constant = 0.0;
    double band_lo = 0.0;
    double band_hi = 0.0;
    Status status = Status::recorded;
    bool converged = true;
    std::string reason;
    long evaluations = 0;
    double runtime_s = 0.0;  // wall clock; kept out of the deterministic bundle files
};

struct SuiteResult {
    std::vector<VerificationReport> reports;
    int passed = 0;
    int failed = 0;
    int skipped = 0;
    int recorded = 0;
    std::vector<std::string> files;  // written bundle files, relative to out_dir

    bool ok() const { return failed == 0; }
};

// Runs the individual experiments against one ladder table.
class Verifier {
public:
    Verifier(const LadderTable& table, const RunConfig& cfg);

    std::vector<VerificationReport> density(const std::vector<std::pair<double, double>>& pairs) const;
    std::vector<VerificationReport> product(double T, const std::vector<int>& n_list) const;
    std::vector<VerificationReport> weighted(double T) const;
    std::vector<VerificationReport> transfer(double T, double U, const std::vector<int>& r_list) const;
    std::vector<VerificationReport> increment(double T, const std::vector<int>& n_list) const;
    // Stability of the empirical constant across stability_T.
    std::vector<VerificationReport> short_interval() const;
    std::vector<VerificationReport> iterated() const;
    // Includes the Cauchy-Schwarz rows against iterated().
    std::vector<VerificationReport> squared() const;
    std::vector<VerificationReport> first_power(double T) const;
    std::vector<VerificationReport> fourth_power(double T) const;
    std::vector<VerificationReport> arg_moment(double T) const;
    std::vector<VerificationReport> s1_moment(double T) const;
    std::vector<VerificationReport> signal_energies() const;

    std::vector<VerificationReport> run_claim(const std::string& claim_id) const;
    const Functionals& functionals() const { return fun_; }

private:
    std::pair<double, double> band_for(const std::string& claim, std::pair<double, double> fallback) const;
    void finish(VerificationReport& r) const;
    void apply_stability(std::vector<VerificationReport>& rows, int power) const;

    const LadderTable& table_;
    RunConfig cfg_;
    Functionals fun_;
};

// Table extent needed by the enabled claims of cfg.
std::pair<double, double> required_table_range(const RunConfig& cfg);

// Builds (or loads) the table, runs every enabled claim, writes the bundle
// into cfg.out_dir. Non-convergence inside a claim is recorded, not thrown.
SuiteResult run_suite(const RunConfig& cfg);
SuiteResult run_suite(const RunConfig& cfg, const LadderTable& table);

// Bundle writer alone; returns the written file names.
std::vector<std::string> write_bundle(const std::vector<VerificationReport>& reports, const RunConfig& cfg);

}  // namespace ladderlab
