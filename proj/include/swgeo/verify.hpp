#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "swgeo/random.hpp"

namespace swgeo::verify {

struct Options {
    double tol_scale = 1.0;             // multiplies every error tolerance
    std::optional<RandomSeed> seed;     // overrides the per-check default
    std::optional<std::size_t> atoms;   // atom count for identity-delta
};

struct Result {
    int id;
    std::string name;
    bool passed;
    double metric;     // headline number compared against the threshold
    double threshold;
    std::string detail;
    double seconds;
    double time_limit;
};

struct Check {
    int id;
    std::string name;
    std::string summary;
};

const std::vector<Check>& checks();

// Runs one named check, or every check for "all". Unknown names throw
// InputError.
std::vector<Result> run(const std::string& suite, const Options& opts = {});

// "PASS|FAIL <id> <name>: <detail> (<seconds>s)".
std::string format(const Result& r);

}  // namespace swgeo::verify
