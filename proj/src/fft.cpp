#include "nonlocal/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace nonlocal {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("FftPlan: length must be positive");
    pow2_ = is_pow2(n);
    if (pow2_) {
        bitrev_.resize(n);
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
            bitrev_[i] = r;
        }
        twiddle_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double ang = -2.0 * pi * static_cast<double>(k) / static_cast<double>(n);
            twiddle_[k] = {std::cos(ang), std::sin(ang)};
        }
    } else {
        m_ = next_pow2(2 * n - 1);
        inner_ = std::make_shared<FftPlan>(m_);
        chirp_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            // k^2 mod 2n keeps the angle argument small for large k
            const std::size_t k2 = (k * k) % (2 * n);
            const double ang = -pi * static_cast<double>(k2) / static_cast<double>(n);
            chirp_[k] = {std::cos(ang), std::sin(ang)};
        }
        std::vector<cplx> b(m_, cplx{0.0, 0.0});
        b[0] = std::conj(chirp_[0]);
        for (std::size_t k = 1; k < n; ++k) {
            b[k] = std::conj(chirp_[k]);
            b[m_ - k] = std::conj(chirp_[k]);
        }
        inner_->forward(b.data());
        chirp_fft_ = std::move(b);
    }
}

void FftPlan::radix2(cplx* a, bool inverse) const {
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = bitrev_[i];
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                cplx w = twiddle_[k * step];
                if (inverse) w = std::conj(w);
                const cplx u = a[i + k];
                const cplx t = a[i + k + half] * w;
                a[i + k] = u + t;
                a[i + k + half] = u - t;
            }
        }
    }
}

void FftPlan::bluestein(cplx* a, bool inverse) const {
    const std::size_t n = n_;
    std::vector<cplx> x(m_, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
        const cplx c = inverse ? std::conj(chirp_[k]) : chirp_[k];
        x[k] = a[k] * c;
    }
    inner_->forward(x.data());
    if (inverse) {
        // convolution kernel for the conjugate chirp is the conjugate spectrum
        // of the reversed sequence; recompute from the stored table
        std::vector<cplx> b(m_, cplx{0.0, 0.0});
        b[0] = chirp_[0];
        for (std::size_t k = 1; k < n; ++k) {
            b[k] = chirp_[k];
            b[m_ - k] = chirp_[k];
        }
        inner_->forward(b.data());
        for (std::size_t k = 0; k < m_; ++k) x[k] *= b[k];
    } else {
        for (std::size_t k = 0; k < m_; ++k) x[k] *= chirp_fft_[k];
    }
    inner_->inverse(x.data());
    for (std::size_t k = 0; k < n; ++k) {
        const cplx c = inverse ? std::conj(chirp_[k]) : chirp_[k];
        a[k] = x[k] * c;
    }
}

void FftPlan::transform(cplx* data, bool inverse) const {
    if (pow2_)
        radix2(data, inverse);
    else
        bluestein(data, inverse);
}

void FftPlan::inverse(cplx* data) const {
    transform(data, true);
    const double s = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) data[i] *= s;
}

const FftPlan& fft_plan(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<FftPlan>(n)).first;
    return *it->second;
}

std::vector<cplx> fft(std::vector<cplx> v) {
    fft_plan(v.size()).forward(v);
    return v;
}

std::vector<cplx> ifft(std::vector<cplx> v) {
    fft_plan(v.size()).inverse(v);
    return v;
}

void fft2(std::vector<cplx>& a, std::size_t rows, std::size_t cols, bool inverse) {
    if (a.size() != rows * cols) throw std::invalid_argument("fft2: size mismatch");
    const FftPlan& pr = fft_plan(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        cplx* row = a.data() + r * cols;
        if (inverse)
            pr.inverse(row);
        else
            pr.forward(row);
    }
    const FftPlan& pc = fft_plan(rows);
    std::vector<cplx> col(rows);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) col[r] = a[r * cols + c];
        if (inverse)
            pc.inverse(col.data());
        else
            pc.forward(col.data());
        for (std::size_t r = 0; r < rows; ++r) a[r * cols + c] = col[r];
    }
}

}  // namespace nonlocal
