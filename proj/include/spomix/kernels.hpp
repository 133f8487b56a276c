#pragma once

#include <cstddef>

namespace spomix::kernels {

/// Reduction kernels behind the moment estimators. Every kernel exists as a
/// scalar reference implementation and, on x86-64 with AVX2, a vectorized
/// variant; the active variant is chosen once at startup from CPUID (override
/// with set_backend or the SPOMIX_BACKEND environment variable, values
/// "scalar" / "avx2"). All variants use Neumaier-compensated accumulation, so
/// results agree to roundoff even for n in the millions; the test suite
/// checks scalar/SIMD equivalence against a long-double oracle.

enum class Backend { scalar, avx2 };

const char* backend_name(Backend b);
bool backend_supported(Backend b);

/// Currently dispatched backend.
Backend active_backend();

/// Switches the dispatched backend. Returns false (and leaves the dispatch
/// unchanged) if the CPU does not support the request.
bool set_backend(Backend b);

/// sum_i v[i]
double sum(const double* v, std::size_t n);

/// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

/// sum_i a[i] * b[i] * c[i]
double dot3(const double* a, const double* b, const double* c, std::size_t n);

/// Scalar reference implementations, always available. These are the
/// equivalence oracles for the dispatched kernels.
namespace ref {
double sum(const double* v, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
} // namespace ref

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double sum(const double* v, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
} // namespace avx2
#endif

} // namespace spomix::kernels
