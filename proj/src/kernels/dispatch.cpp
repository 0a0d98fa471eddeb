#include <atomic>
#include <cstdlib>
#include <cstring>

#include "hessmooth/error.hpp"
#include "hessmooth/kernels.hpp"

namespace hessmooth::kernels {

namespace {

constexpr KernelTable kScalar{&scalar::dot, &scalar::axpy, &scalar::csr_spmv,
                              &scalar::soft_threshold};
constexpr KernelTable kAvx2{&avx2::dot, &avx2::axpy, &avx2::csr_spmv,
                            &avx2::soft_threshold};

Isa detect() {
  if (const char* env = std::getenv("HESSMOOTH_ISA");
      env != nullptr && std::strcmp(env, "scalar") == 0)
    return Isa::Scalar;
  return cpu_supports(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool cpu_supports(Isa isa) {
  if (isa == Isa::Scalar) return true;
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return avx2::compiled() && __builtin_cpu_supports("avx2") &&
         __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& table(Isa isa) {
  return isa == Isa::Avx2 ? kAvx2 : kScalar;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  require(cpu_supports(isa), "kernels: ISA not supported on this CPU");
  active().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: dimension mismatch");
  return table(active_isa()).dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: dimension mismatch");
  table(active_isa()).axpy(alpha, x.data(), y.data(), x.size());
}

void soft_threshold(std::span<const double> in, double t,
                    std::span<double> out) {
  require(in.size() == out.size(), "soft_threshold: dimension mismatch");
  table(active_isa()).soft_threshold(in.data(), t, out.data(), in.size());
}

}  // namespace hessmooth::kernels
