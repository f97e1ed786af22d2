#pragma once

// Inner-loop kernels over contiguous row-major double buffers.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// implementation chosen at runtime from CPUID. The vector variants vectorize
// across the output index only and keep the per-element accumulation order of
// the scalar loops (no FMA contraction), so both backends produce bit-identical
// results.

#include <cstddef>
#include <string_view>

namespace gformer::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend() noexcept;
bool backend_supported(Backend backend) noexcept;
std::string_view backend_name(Backend backend) noexcept;
// Throws std::invalid_argument when the CPU cannot run the requested backend.
void set_backend(Backend backend);

// RAII override of the active backend.
class ScopedBackend {
public:
    explicit ScopedBackend(Backend backend) : previous_(active_backend()) { set_backend(backend); }
    ~ScopedBackend() { set_backend(previous_); }
    ScopedBackend(const ScopedBackend&) = delete;
    ScopedBackend& operator=(const ScopedBackend&) = delete;

private:
    Backend previous_;
};

// c[m x p] = a[m x k] * b[k x p]; accumulation over k ascending starting from 0.
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t p);

// out[i] = x[i] * y[i]
void mul(const double* x, const double* y, double* out, std::size_t n);
// out[i] = x[i] + y[i]
void add(const double* x, const double* y, double* out, std::size_t n);
// out[i] = x[i] * s
void scale(const double* x, double s, double* out, std::size_t n);

// out[r, c] = x[r, c] * v[c]
void mul_rows(const double* x, const double* v, double* out, std::size_t rows, std::size_t cols);
// out[r, c] = x[r, c] + v[c]
void add_rows(const double* x, const double* v, double* out, std::size_t rows, std::size_t cols);
// out[c] = sum_r x[r, c], r ascending from 0
void col_sum(const double* x, double* out, std::size_t rows, std::size_t cols);
// out[c] = sum_r x[r, c] * w[r, c], r ascending from 0
void col_dot(const double* x, const double* w, double* out, std::size_t rows, std::size_t cols);

namespace scalar {
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t p);
void mul(const double* x, const double* y, double* out, std::size_t n);
void add(const double* x, const double* y, double* out, std::size_t n);
void scale(const double* x, double s, double* out, std::size_t n);
void mul_rows(const double* x, const double* v, double* out, std::size_t rows, std::size_t cols);
void add_rows(const double* x, const double* v, double* out, std::size_t rows, std::size_t cols);
void col_sum(const double* x, double* out, std::size_t rows, std::size_t cols);
void col_dot(const double* x, const double* w, double* out, std::size_t rows, std::size_t cols);
}  // namespace scalar

#if defined(GFORMER_HAVE_AVX2)
namespace avx2 {
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t p);
void mul(const double* x, const double* y, double* out, std::size_t n);
void add(const double* x, const double* y, double* out, std::size_t n);
void scale(const double* x, double s, double* out, std::size_t n);
void mul_rows(const double* x, const double* v, double* out, std::size_t rows, std::size_t cols);
void add_rows(const double* x, const double* v, double* out, std::size_t rows, std::size_t cols);
void col_sum(const double* x, double* out, std::size_t rows, std::size_t cols);
void col_dot(const double* x, const double* w, double* out, std::size_t rows, std::size_t cols);
}  // namespace avx2
#endif

}  // namespace gformer::kernels
