#pragma once

// Dense double-precision kernels behind a runtime-selected backend.
//
// Every backend computes the same mathematical result; only the summation
// order differs, so results agree to a few ulps, not bit-for-bit. The
// backend is fixed for the life of the process unless a test overrides it.

#include <cstddef>
#include <span>
#include <string_view>

namespace biocom::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// Best backend the running CPU supports. `BIOCOM_SIMD=scalar` in the
/// environment pins the scalar path.
Isa detect_isa();

/// Backend used by the dispatching entry points below.
Isa active_isa();

/// Overrides the active backend; throws if the CPU lacks it. Not thread-safe
/// with concurrent kernel calls.
void set_active_isa(Isa isa);

bool isa_supported(Isa isa);

/// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// x *= alpha
void scale(double alpha, std::span<double> x);

/// out[r] = dot(matrix row r, x) for a row-major rows x x.size() matrix.
void matvec(std::span<const double> matrix, std::span<const double> x, std::span<double> out);

// Direct access to each backend for equivalence tests.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* out);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* out);
}  // namespace neon
#endif

}  // namespace biocom::simd
