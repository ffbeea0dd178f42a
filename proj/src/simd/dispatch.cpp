#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "biocom/simd/kernels.hpp"

namespace biocom::simd {
namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  void (*matvec)(const double*, std::size_t, std::size_t, const double*, double*);
};

constexpr Table kScalar{scalar::dot, scalar::axpy, scalar::scale, scalar::matvec};
#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2{avx2::dot, avx2::axpy, avx2::scale, avx2::matvec};
#endif
#if defined(__aarch64__)
constexpr Table kNeon{neon::dot, neon::axpy, neon::scale, neon::matvec};
#endif

const Table* table_for(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2: return &kAvx2;
#endif
#if defined(__aarch64__)
    case Isa::neon: return &kNeon;
#endif
    default: return &kScalar;
  }
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detect_isa()};
  return isa;
}

const Table& current() { return *table_for(active().load(std::memory_order_relaxed)); }

void check_size(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("simd::") + what + ": size mismatch");
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() {
  if (const char* env = std::getenv("BIOCOM_SIMD"); env != nullptr && std::string(env) == "scalar") return Isa::scalar;
  if (isa_supported(Isa::avx2)) return Isa::avx2;
  if (isa_supported(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) throw std::runtime_error("SIMD backend not supported on this CPU: " + std::string(isa_name(isa)));
  active().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_size(a.size() == b.size(), "dot");
  return current().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_size(x.size() == y.size(), "axpy");
  current().axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> x) { current().scale(alpha, x.data(), x.size()); }

void matvec(std::span<const double> matrix, std::span<const double> x, std::span<double> out) {
  check_size(x.empty() ? matrix.empty() : matrix.size() == out.size() * x.size(), "matvec");
  if (out.empty()) return;
  current().matvec(matrix.data(), out.size(), x.size(), x.data(), out.data());
}

}  // namespace biocom::simd
