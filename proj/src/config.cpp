#include "ladderlab/config.hpp"

#include "ladderlab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace ladderlab {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end) throw FormatError("config: " + key + " expects a number, got '" + v + "'");
    return x;
}

int to_int(const std::string& key, const std::string& v) {
    int x = 0;
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end) throw FormatError("config: " + key + " expects an integer, got '" + v + "'");
    return x;
}

std::pair<double, double> to_pair(const std::string& key, const std::string& v, char sep) {
    const auto parts = split(v, sep);
    if (parts.size() != 2) throw FormatError("config: " + key + " expects two numbers separated by '" + sep + "'");
    return {to_double(key, parts[0]), to_double(key, parts[1])};
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
    return out;
}

}  // namespace

const std::vector<std::string>& known_claims() {
    static const std::vector<std::string> ids{
        "density",     "product",      "weighted",     "transfer",     "increment",
        "short-interval", "iterated",  "squared",      "first-power",  "fourth-power",
        "arg-moment",  "s1-moment",    "signal-energies"};
    return ids;
}

RunConfig::RunConfig() : claims(known_claims()) {}

void RunConfig::set(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if (key == "rs_correction_terms") eval.rs_correction_terms = to_int(key, v);
    else if (key == "rs_crossover") eval.rs_crossover = to_double(key, v);
    else if (key == "target_abs_tol") eval.target_abs_tol = to_double(key, v);
    else if (key == "fd_order") eval.fd_order = to_int(key, v);
    else if (key == "fd_step_divisor") eval.fd_step_divisor = to_double(key, v);
    else if (key == "fd_check_rel") eval.fd_check_rel = to_double(key, v);
    else if (key == "points_per_oscillation") policy.points_per_oscillation = to_int(key, v);
    else if (key == "max_depth") policy.max_depth = to_int(key, v);
    else if (key == "rule_order") policy.rule_order = to_int(key, v);
    else if (key == "t_start") t_start = to_double(key, v);
    else if (key == "t_end") t_end = to_double(key, v);
    else if (key == "step") step = to_double(key, v);
    else if (key == "solve_tol") solve_tol = to_double(key, v);
    else if (key == "tail_eps") tail_eps = to_double(key, v);
    else if (key == "table") table = v;
    else if (key == "epsilon") epsilon = to_double(key, v);
    else if (key == "c_exp") c_exp = to_double(key, v);
    else if (key == "rel_tol") rel_tol = to_double(key, v);
    else if (key == "spread_max") spread_max = to_double(key, v);
    else if (key == "T") T = to_double(key, v);
    else if (key == "stability_T") {
        stability_T.clear();
        for (const auto& x : split(v, ',')) stability_T.push_back(to_double(key, x));
    } else if (key == "density_pairs") {
        density_pairs.clear();
        for (const auto& x : split(v, ',')) density_pairs.push_back(to_pair(key, x, ':'));
    } else if (key == "short_U") short_U = to_double(key, v);
    else if (key == "claims") claims = split(v, ',');
    else if (key.rfind("band.", 0) == 0) bands[key.substr(5)] = to_pair(key, v, ',');
    else if (key == "out_dir") out_dir = v;
    else if (key == "format") format = v;
    else if (key == "jobs") jobs = to_int(key, v);
    else if (key == "cache_dir") cache_dir = v;
    else throw FormatError("config: unknown key '" + key + "'");
}

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        try {
            cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const FormatError& e) {
            throw FormatError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("config: cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string RunConfig::to_text() const {
    std::ostringstream o;
    o << "# ladderlab run config\n";
    o << "\n# evaluation\n";
    o << "rs_correction_terms = " << eval.rs_correction_terms << "\n";
    o << "rs_crossover = " << fmt(eval.rs_crossover) << "\n";
    o << "target_abs_tol = " << fmt(eval.target_abs_tol) << "\n";
    o << "fd_order = " << eval.fd_order << "\n";
    o << "fd_step_divisor = " << fmt(eval.fd_step_divisor) << "\n";
    o << "fd_check_rel = " << fmt(eval.fd_check_rel) << "\n";
    o << "\n# quadrature\n";
    o << "points_per_oscillation = " << policy.points_per_oscillation << "\n";
    o << "max_depth = " << policy.max_depth << "\n";
    o << "rule_order = " << policy.rule_order << "\n";
    o << "rel_tol = " << fmt(rel_tol) << "\n";
    o << "\n# ladder table (t_start = t_end = 0: sized from the claims)\n";
    o << "t_start = " << fmt(t_start) << "\n";
    o << "t_end = " << fmt(t_end) << "\n";
    o << "step = " << fmt(step) << "\n";
    o << "solve_tol = " << fmt(solve_tol) << "\n";
    o << "tail_eps = " << fmt(tail_eps) << "\n";
    o << "table = " << table << "\n";
    o << "\n# regimes and experiments\n";
    o << "epsilon = " << fmt(epsilon) << "\n";
    o << "c_exp = " << fmt(c_exp) << "\n";
    o << "spread_max = " << fmt(spread_max) << "\n";
    o << "T = " << fmt(T) << "\n";
    std::vector<std::string> items;
    for (double t : stability_T) items.push_back(fmt(t));
    o << "stability_T = " << join(items) << "\n";
    items.clear();
    for (const auto& [t, u] : density_pairs) items.push_back(fmt(t) + ":" + fmt(u));
    o << "density_pairs = " << join(items) << "\n";
    o << "short_U = " << fmt(short_U) << "\n";
    o << "claims = " << join(claims) << "\n";
    for (const auto& [id, band] : bands) o << "band." << id << " = " << fmt(band.first) << "," << fmt(band.second) << "\n";
    o << "\n# output\n";
    o << "out_dir = " << out_dir << "\n";
    o << "format = " << format << "\n";
    o << "jobs = " << jobs << "\n";
    o << "cache_dir = " << cache_dir << "\n";
    return o.str();
}

void RunConfig::validate() const {
    eval.validate();
    policy.validate();
    const auto& known = known_claims();
    auto is_known = [&](const std::string& id) { return std::find(known.begin(), known.end(), id) != known.end(); };
    for (const auto& c : claims) {
        if (!is_known(c)) throw DomainError("unknown claim id '" + c + "'");
    }
    for (const auto& [id, band] : bands) {
        if (!is_known(id)) throw DomainError("band override for unknown claim id '" + id + "'");
        if (!(band.first <= band.second)) throw DomainError("band." + id + ": lower bound exceeds upper bound");
    }
    if (format != "delimited" && format != "structured" && format != "both") {
        throw DomainError("format must be delimited, structured or both");
    }
    if (jobs < 1) throw DomainError("jobs must be >= 1");
    if (!(step > 0.0)) throw DomainError("step must be positive");
    if (!(t_start >= 0.0 && t_end >= 0.0)) throw DomainError("t_start and t_end must be >= 0");
    if ((t_start > 0.0 || t_end > 0.0) && !(t_end > t_start)) throw DomainError("t_end must exceed t_start");
    if (!(solve_tol > 0.0 && tail_eps > 0.0 && rel_tol > 0.0)) throw DomainError("tolerances must be positive");
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw DomainError("epsilon must lie in (0, 0.5)");
    if (!(c_exp > 0.0)) throw DomainError("c_exp must be positive");
    if (!(spread_max >= 1.0)) throw DomainError("spread_max must be >= 1");
    if (!(T >= 100.0)) throw DomainError("T must be >= 100");
    if (!(short_U > 0.0)) throw DomainError("short_U must be positive");
    for (double t : stability_T) {
        if (!(t >= 100.0)) throw DomainError("stability_T entries must be >= 100");
    }
    for (const auto& [t, u] : density_pairs) {
        if (!(t >= 100.0 && u >= 0.0)) throw DomainError("density_pairs need T >= 100 and U >= 0");
    }
}

}  // namespace ladderlab
