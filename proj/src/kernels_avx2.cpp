// Compiled with -mavx2 (and without -mfma); only reached after a CPUID check.
#include <immintrin.h>

#include "gformer/kernels.hpp"

namespace gformer::kernels::avx2 {

namespace {
constexpr std::size_t kLanes = 4;
}

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t p) {
    const std::size_t pv = p - p % kLanes;
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * p;
        for (std::size_t j = 0; j < p; ++j) crow[j] = 0.0;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = a[i * k + kk];
            const __m256d av = _mm256_set1_pd(aik);
            const double* brow = b + kk * p;
            std::size_t j = 0;
            for (; j + 4 * kLanes <= pv; j += 4 * kLanes) {
                __m256d c0 = _mm256_loadu_pd(crow + j);
                __m256d c1 = _mm256_loadu_pd(crow + j + 4);
                __m256d c2 = _mm256_loadu_pd(crow + j + 8);
                __m256d c3 = _mm256_loadu_pd(crow + j + 12);
                c0 = _mm256_add_pd(c0, _mm256_mul_pd(av, _mm256_loadu_pd(brow + j)));
                c1 = _mm256_add_pd(c1, _mm256_mul_pd(av, _mm256_loadu_pd(brow + j + 4)));
                c2 = _mm256_add_pd(c2, _mm256_mul_pd(av, _mm256_loadu_pd(brow + j + 8)));
                c3 = _mm256_add_pd(c3, _mm256_mul_pd(av, _mm256_loadu_pd(brow + j + 12)));
                _mm256_storeu_pd(crow + j, c0);
                _mm256_storeu_pd(crow + j + 4, c1);
                _mm256_storeu_pd(crow + j + 8, c2);
                _mm256_storeu_pd(crow + j + 12, c3);
            }
            for (; j < pv; j += kLanes) {
                __m256d cv = _mm256_loadu_pd(crow + j);
                cv = _mm256_add_pd(cv, _mm256_mul_pd(av, _mm256_loadu_pd(brow + j)));
                _mm256_storeu_pd(crow + j, cv);
            }
            for (; j < p; ++j) crow[j] += aik * brow[j];
        }
    }
}

void mul(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void add(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] + y[i];
}

void scale(const double* x, double s, double* out, std::size_t n) {
    const __m256d sv = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), sv));
    for (; i < n; ++i) out[i] = x[i] * s;
}

void mul_rows(const double* x, const double* v, double* out, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) mul(x + r * cols, v, out + r * cols, cols);
}

void add_rows(const double* x, const double* v, double* out, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) add(x + r * cols, v, out + r * cols, cols);
}

void col_sum(const double* x, double* out, std::size_t rows, std::size_t cols) {
    for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) add(out, x + r * cols, out, cols);
}

void col_dot(const double* x, const double* w, double* out, std::size_t rows, std::size_t cols) {
    const std::size_t cv = cols - cols % kLanes;
    for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * cols;
        const double* wr = w + r * cols;
        std::size_t c = 0;
        for (; c < cv; c += kLanes) {
            __m256d acc = _mm256_loadu_pd(out + c);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(xr + c), _mm256_loadu_pd(wr + c)));
            _mm256_storeu_pd(out + c, acc);
        }
        for (; c < cols; ++c) out[c] += xr[c] * wr[c];
    }
}

}  // namespace gformer::kernels::avx2
