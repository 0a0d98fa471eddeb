#pragma once

// Dense inner-loop kernels used by the sparse layer and the L1 solver.
//
// Every kernel has a portable scalar reference and an AVX2 variant. The
// variant is picked once at startup from CPUID; HESSMOOTH_ISA=scalar in the
// environment pins the reference path. Element-wise kernels (axpy,
// soft_threshold) are bitwise identical across variants; reductions (dot,
// csr_spmv) differ only by summation order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace hessmooth::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*csr_spmv)(const std::int32_t* row_ptr, const std::int32_t* cols,
                   const double* vals, const double* x, double* y,
                   std::size_t nrows);
  void (*soft_threshold)(const double* in, double t, double* out,
                         std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void csr_spmv(const std::int32_t* row_ptr, const std::int32_t* cols,
              const double* vals, const double* x, double* y,
              std::size_t nrows);
void soft_threshold(const double* in, double t, double* out, std::size_t n);
}  // namespace scalar

namespace avx2 {
/// False when the library was built for a target without x86 intrinsics.
bool compiled();
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void csr_spmv(const std::int32_t* row_ptr, const std::int32_t* cols,
              const double* vals, const double* x, double* y,
              std::size_t nrows);
void soft_threshold(const double* in, double t, double* out, std::size_t n);
}  // namespace avx2

bool cpu_supports(Isa isa);
const KernelTable& table(Isa isa);

/// The variant currently used by the span-based wrappers below.
Isa active_isa();
/// Override the selection (tests use this to run both paths).
void set_active_isa(Isa isa);
std::string_view isa_name(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void soft_threshold(std::span<const double> in, double t,
                    std::span<double> out);

}  // namespace hessmooth::kernels
