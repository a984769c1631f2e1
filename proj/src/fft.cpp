#include "gaugep/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace gaugep {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Fft::Fft(const std::vector<int>& extents) {
    size_ = 1;
    for (int e : extents) size_ *= e;
    std::lock_guard<std::mutex> lock(planner_mutex());
    buf_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * size_));
    auto* b = reinterpret_cast<fftw_complex*>(buf_);
    const int rank = static_cast<int>(extents.size());
    fwd_ = fftw_plan_dft(rank, extents.data(), b, b, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft(rank, extents.data(), b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
}

void Fft::forward() { fftw_execute(fwd_); }
void Fft::backward() { fftw_execute(bwd_); }

}  // namespace gaugep
