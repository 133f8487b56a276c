#include "spomix/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace spomix::kernels {

namespace {

// Neumaier running sum: the compensation catches the low-order bits whichever
// of (sum, term) is larger in magnitude.
struct Compensated {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }

    double value() const { return sum + comp; }
};

} // namespace

namespace ref {

double sum(const double* v, std::size_t n) {
    Compensated acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(v[i]);
    return acc.value();
}

double dot(const double* a, const double* b, std::size_t n) {
    Compensated acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * b[i]);
    return acc.value();
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
    Compensated acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * b[i] * c[i]);
    return acc.value();
}

} // namespace ref

namespace {

struct Ops {
    double (*sum)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*dot3)(const double*, const double*, const double*, std::size_t);
    Backend backend;
};

constexpr Ops kScalarOps{ref::sum, ref::dot, ref::dot3, Backend::scalar};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Ops kAvx2Ops{avx2::sum, avx2::dot, avx2::dot3, Backend::avx2};

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2"); }
#else
bool cpu_has_avx2() { return false; }
#endif

const Ops* pick_default() {
    if (const char* env = std::getenv("SPOMIX_BACKEND")) {
        if (std::strcmp(env, "scalar") == 0) return &kScalarOps;
#if defined(__x86_64__) || defined(_M_X64)
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return &kAvx2Ops;
#endif
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) return &kAvx2Ops;
#endif
    return &kScalarOps;
}

std::atomic<const Ops*>& dispatch() {
    static std::atomic<const Ops*> ops{pick_default()};
    return ops;
}

} // namespace

const char* backend_name(Backend b) {
    return b == Backend::scalar ? "scalar" : "avx2";
}

bool backend_supported(Backend b) {
    return b == Backend::scalar || cpu_has_avx2();
}

Backend active_backend() { return dispatch().load()->backend; }

bool set_backend(Backend b) {
    if (b == Backend::scalar) {
        dispatch().store(&kScalarOps);
        return true;
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) {
        dispatch().store(&kAvx2Ops);
        return true;
    }
#endif
    return false;
}

double sum(const double* v, std::size_t n) { return dispatch().load()->sum(v, n); }

double dot(const double* a, const double* b, std::size_t n) {
    return dispatch().load()->dot(a, b, n);
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
    return dispatch().load()->dot3(a, b, c, n);
}

} // namespace spomix::kernels
