#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "gformer/kernels.hpp"

namespace gformer::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(GFORMER_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

// GFORMER_KERNELS=scalar forces the reference path.
Backend initial_backend() noexcept {
    if (const char* env = std::getenv("GFORMER_KERNELS"); env && std::string(env) == "scalar")
        return Backend::scalar;
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
    static std::atomic<Backend> backend{initial_backend()};
    return backend;
}

bool use_avx2() noexcept {
    return current().load(std::memory_order_relaxed) == Backend::avx2;
}

}  // namespace

Backend active_backend() noexcept { return current().load(); }

bool backend_supported(Backend backend) noexcept {
    return backend == Backend::scalar || cpu_has_avx2();
}

std::string_view backend_name(Backend backend) noexcept {
    return backend == Backend::avx2 ? "avx2" : "scalar";
}

void set_backend(Backend backend) {
    if (!backend_supported(backend))
        throw std::invalid_argument("kernel backend not supported on this CPU: " +
                                    std::string(backend_name(backend)));
    current().store(backend);
}

#if defined(GFORMER_HAVE_AVX2)
#define GFORMER_DISPATCH(fn, ...) \
    (use_avx2() ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define GFORMER_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t p) {
    GFORMER_DISPATCH(gemm, a, b, c, m, k, p);
}
void mul(const double* x, const double* y, double* out, std::size_t n) {
    GFORMER_DISPATCH(mul, x, y, out, n);
}
void add(const double* x, const double* y, double* out, std::size_t n) {
    GFORMER_DISPATCH(add, x, y, out, n);
}
void scale(const double* x, double s, double* out, std::size_t n) {
    GFORMER_DISPATCH(scale, x, s, out, n);
}
void mul_rows(const double* x, const double* v, double* out, std::size_t rows, std::size_t cols) {
    GFORMER_DISPATCH(mul_rows, x, v, out, rows, cols);
}
void add_rows(const double* x, const double* v, double* out, std::size_t rows, std::size_t cols) {
    GFORMER_DISPATCH(add_rows, x, v, out, rows, cols);
}
void col_sum(const double* x, double* out, std::size_t rows, std::size_t cols) {
    GFORMER_DISPATCH(col_sum, x, out, rows, cols);
}
void col_dot(const double* x, const double* w, double* out, std::size_t rows, std::size_t cols) {
    GFORMER_DISPATCH(col_dot, x, w, out, rows, cols);
}

#undef GFORMER_DISPATCH

}  // namespace gformer::kernels
