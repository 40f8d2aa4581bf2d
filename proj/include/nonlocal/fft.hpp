#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "nonlocal/util.hpp"

namespace nonlocal {

// In-place complex FFT. Radix-2 for power-of-two lengths, Bluestein otherwise,
// so every grid size gets the same interface. Plans hold twiddle tables and are
// immutable after construction.
class FftPlan {
public:
    explicit FftPlan(std::size_t n);

    std::size_t size() const { return n_; }

    void forward(cplx* data) const { transform(data, false); }
    void inverse(cplx* data) const;  // includes the 1/n scaling

    void forward(std::vector<cplx>& v) const { forward(v.data()); }
    void inverse(std::vector<cplx>& v) const { inverse(v.data()); }

private:
    void transform(cplx* data, bool inverse) const;
    void radix2(cplx* data, bool inverse) const;
    void bluestein(cplx* data, bool inverse) const;

    std::size_t n_ = 0;
    bool pow2_ = false;
    // radix-2 tables
    std::vector<std::size_t> bitrev_;
    std::vector<cplx> twiddle_;  // forward twiddles, conjugated on inverse
    // bluestein state
    std::size_t m_ = 0;  // convolution length (power of two >= 2n-1)
    std::shared_ptr<FftPlan> inner_;
    std::vector<cplx> chirp_;      // exp(-i pi k^2 / n)
    std::vector<cplx> chirp_fft_;  // FFT of padded conjugate chirp
};

// Cached plan lookup (thread-safe, insert-only).
const FftPlan& fft_plan(std::size_t n);

// Convenience out-of-place helpers.
std::vector<cplx> fft(std::vector<cplx> v);
std::vector<cplx> ifft(std::vector<cplx> v);

/// In-place 2-D transform of a rows x cols row-major array.
void fft2(std::vector<cplx>& a, std::size_t rows, std::size_t cols, bool inverse);

}  // namespace nonlocal
