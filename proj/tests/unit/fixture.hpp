#pragma once

#include "ladderlab/ladder.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// One small table around t = 1000 shared by the tests of a binary.
namespace fixture {

inline ladderlab::LadderOptions small_options() {
    ladderlab::LadderOptions o;
    o.t_start = 700.0;
    o.t_end = 1300.0;
    o.step = 10.0;
    return o;
}

inline const ladderlab::Ladder& ladder() {
    static const ladderlab::Ladder l(small_options());
    return l;
}

inline const ladderlab::LadderTable& table() {
    static const ladderlab::LadderTable t = ladder().build_table();
    return t;
}

inline std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "ladderlab-tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

}  // namespace fixture
