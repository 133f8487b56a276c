// AVX2 kernel variants. Built with -mavx2 -mfma; only reached when CPUID
// reports AVX2 at runtime (see kernels.cpp dispatch).

#include "spomix/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace spomix::kernels::avx2 {

namespace {

// Four independent Neumaier accumulator lanes.
struct Compensated4 {
    __m256d sum = _mm256_setzero_pd();
    __m256d comp = _mm256_setzero_pd();

    void add(__m256d x) {
        const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
        const __m256d t = _mm256_add_pd(sum, x);
        const __m256d big_is_sum =
            _mm256_cmp_pd(_mm256_and_pd(sum, abs_mask), _mm256_and_pd(x, abs_mask), _CMP_GE_OQ);
        const __m256d big = _mm256_blendv_pd(x, sum, big_is_sum);
        const __m256d small = _mm256_blendv_pd(sum, x, big_is_sum);
        comp = _mm256_add_pd(comp, _mm256_add_pd(_mm256_sub_pd(big, t), small));
        sum = t;
    }

    // Lane sums and compensations combined through one more scalar Neumaier
    // pass, plus the scalar tail.
    double finish(double tail_sum, double tail_comp) const {
        alignas(32) double s[4];
        alignas(32) double c[4];
        _mm256_store_pd(s, sum);
        _mm256_store_pd(c, comp);
        double acc = 0.0, k = 0.0;
        auto neumaier = [&](double x) {
            const double t = acc + x;
            if (std::abs(acc) >= std::abs(x)) {
                k += (acc - t) + x;
            } else {
                k += (x - t) + acc;
            }
            acc = t;
        };
        for (double v : s) neumaier(v);
        for (double v : c) neumaier(v);
        neumaier(tail_sum);
        neumaier(tail_comp);
        return acc + k;
    }
};

struct CompensatedTail {
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
};

} // namespace

double sum(const double* v, std::size_t n) {
    Compensated4 acc;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc.add(_mm256_loadu_pd(v + i));
    CompensatedTail tail;
    for (; i < n; ++i) tail.add(v[i]);
    return acc.finish(tail.sum, tail.comp);
}

double dot(const double* a, const double* b, std::size_t n) {
    Compensated4 acc;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc.add(_mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    CompensatedTail tail;
    for (; i < n; ++i) tail.add(a[i] * b[i]);
    return acc.finish(tail.sum, tail.comp);
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
    Compensated4 acc;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc.add(_mm256_mul_pd(ab, _mm256_loadu_pd(c + i)));
    }
    CompensatedTail tail;
    for (; i < n; ++i) tail.add(a[i] * b[i] * c[i]);
    return acc.finish(tail.sum, tail.comp);
}

} // namespace spomix::kernels::avx2

#endif // x86-64
