#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace swgeo::cli {

inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kToleranceFailure = 2;

// Runs the driver on argv-style arguments (without the program name).
// Reports go to --out files or to out; diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct ConfigSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<std::size_t> lines;  // source line per entry
};

// "key = value" lines grouped under "[section]" headers; '#' and ';' start
// comments. Throws InputError naming the line on malformed input.
std::vector<ConfigSection> parse_config(std::istream& in);

}  // namespace swgeo::cli
