#include "fracspec/fft.hpp"

#include "fracspec/error.hpp"

#include <fftw3.h>

#include <mutex>

namespace fracspec::fft {

namespace {
std::mutex planner_mutex; // the FFTW planner is not reentrant
}

void transform(std::vector<std::complex<double>>& data, const std::vector<int>& dims, int sign) {
    std::size_t total = 1;
    for (int d : dims) {
        require(d > 0, Errc::precondition, "FFT dimensions must be positive");
        total *= static_cast<std::size_t>(d);
    }
    require(total == data.size(), Errc::shape_mismatch, "FFT buffer size does not match dimensions");
    if (total == 0) return;

    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex);
        plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf,
                             sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    require(plan != nullptr, Errc::precondition, "FFTW could not create a plan");
    fftw_execute(plan);
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan);
}

} // namespace fracspec::fft
