#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "swgeo/core.hpp"

namespace swgeo::fft {

namespace {

enum class Kind { r2c_1d, c2r_1d, r2c_2d, c2r_2d };

struct PlanCache {
    std::mutex mutex;
    std::map<std::tuple<Kind, std::size_t, std::size_t>, fftw_plan> plans;

    ~PlanCache() {
        for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
    }

    fftw_plan get(Kind kind, std::size_t n0, std::size_t n1) {
        std::lock_guard lock(mutex);
        const auto key = std::make_tuple(kind, n0, n1);
        if (auto it = plans.find(key); it != plans.end()) return it->second;
        // Planning never touches user buffers: scratch arrays only.
        const std::size_t real_len = (kind == Kind::r2c_2d || kind == Kind::c2r_2d) ? n0 * n1 : n0;
        const std::size_t cplx_len = (kind == Kind::r2c_2d || kind == Kind::c2r_2d) ? n0 * (n1 / 2 + 1) : n0 / 2 + 1;
        std::vector<double> r(real_len);
        std::vector<std::complex<double>> c(cplx_len);
        auto* cp = reinterpret_cast<fftw_complex*>(c.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan plan = nullptr;
        switch (kind) {
            case Kind::r2c_1d: plan = fftw_plan_dft_r2c_1d(static_cast<int>(n0), r.data(), cp, flags); break;
            case Kind::c2r_1d: plan = fftw_plan_dft_c2r_1d(static_cast<int>(n0), cp, r.data(), flags); break;
            case Kind::r2c_2d:
                plan = fftw_plan_dft_r2c_2d(static_cast<int>(n0), static_cast<int>(n1), r.data(), cp, flags);
                break;
            case Kind::c2r_2d:
                plan = fftw_plan_dft_c2r_2d(static_cast<int>(n0), static_cast<int>(n1), cp, r.data(), flags);
                break;
        }
        if (plan == nullptr) throw NumericalError("FFT planning failed");
        plans.emplace(key, plan);
        return plan;
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

}  // namespace

void forward_1d(std::span<double> in, std::span<std::complex<double>> out) {
    fftw_execute_dft_r2c(cache().get(Kind::r2c_1d, in.size(), 0), in.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

void inverse_1d(std::span<std::complex<double>> in, std::span<double> out) {
    fftw_execute_dft_c2r(cache().get(Kind::c2r_1d, out.size(), 0), reinterpret_cast<fftw_complex*>(in.data()),
                         out.data());
}

void forward_2d(std::size_t n0, std::size_t n1, std::span<double> in, std::span<std::complex<double>> out) {
    fftw_execute_dft_r2c(cache().get(Kind::r2c_2d, n0, n1), in.data(), reinterpret_cast<fftw_complex*>(out.data()));
}

void inverse_2d(std::size_t n0, std::size_t n1, std::span<std::complex<double>> in, std::span<double> out) {
    fftw_execute_dft_c2r(cache().get(Kind::c2r_2d, n0, n1), reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

}  // namespace swgeo::fft
