#pragma once

#include "ladderlab/quadrature.hpp"
#include "ladderlab/special_functions.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ladderlab {

// Claim ids understood by the verification suite, in report order.
const std::vector<std::string>& known_claims();

// Everything a verification run depends on. Stored as flat "key = value"
// text; '#' starts a comment. to_text() lists every key, so a file written by
// it parses back to an equal config.
struct RunConfig {
    EvalConfig eval;
    PanelPolicy policy;

    // Ladder table. t_start = t_end = 0 sizes the table from the enabled claims.
    double t_start = 0.0;
    double t_end = 0.0;
    double step = 10.0;
    double solve_tol = 1e-9;
    double tail_eps = 1e-12;
    std::string table;  // reuse a saved table instead of building one

    double epsilon = 0.01;
    double c_exp = 2.0;
    double rel_tol = 1e-8;
    double spread_max = 2.5;

    double T = 1e4;
    std::vector<double> stability_T{1e4, 2e4, 5e4};
    std::vector<std::pair<double, double>> density_pairs{{1e3, 1e2}, {1e4, 1e3}};
    double short_U = 1e3;

    std::vector<std::string> claims;  // defaults to every known claim
    std::map<std::string, std::pair<double, double>> bands;  // overrides, by claim id

    std::string out_dir = "report";
    std::string format = "both";  // delimited | structured | both
    int jobs = 1;
    std::string cache_dir;

    RunConfig();

    // Unknown keys and malformed values raise FormatError naming the line.
    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::string& path);
    std::string to_text() const;
    void set(const std::string& key, const std::string& value);
    // DomainError on out-of-range values, unknown claim ids or formats.
    void validate() const;

    bool operator==(const RunConfig& other) const { return to_text() == other.to_text(); }
};

}  // namespace ladderlab
