#pragma once

#include <vector>

#include "gaugep/common.hpp"

typedef struct fftw_plan_s* fftw_plan;

namespace gaugep {

// Unnormalized in-place complex DFT on a row-major grid. Forward uses e^{-ikx},
// backward e^{+ikx}. Plans are created under a global lock; execution is
// thread-safe as long as each thread owns its Fft object.
class Fft {
public:
    explicit Fft(const std::vector<int>& extents);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    int size() const { return size_; }
    cplx* data() { return buf_; }
    void forward();
    void backward();

private:
    int size_ = 0;
    cplx* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

}  // namespace gaugep
