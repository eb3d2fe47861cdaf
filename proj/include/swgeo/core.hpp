#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace swgeo {

inline constexpr const char* kVersion = "0.3.0";

// Raised for malformed or out-of-contract input.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a numerical precondition fails (non-decaying slice, divergence...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value that may be +inf with a reason attached.
struct FlaggedValue {
    double value = 0.0;
    bool finite = true;
    std::string diagnostic;

    static FlaggedValue infinite(std::string why);
};

// Worker count used by the parallel sweeps; 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
// write into per-index slots and reduce sequentially afterwards, so results
// never depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Sum in index order.
double ordered_sum(const std::vector<double>& terms);

}  // namespace swgeo
