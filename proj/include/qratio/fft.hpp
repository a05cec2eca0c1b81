#pragma once

#include <cstddef>
#include <memory>
#include <new>
#include <span>
#include <vector>

#include "qratio/numeric.hpp"

namespace qratio {

inline constexpr std::size_t kBufferAlignment = 64;

template <class T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{kBufferAlignment}));
  }
  void deallocate(T* p, std::size_t) noexcept {
    ::operator delete(p, std::align_val_t{kBufferAlignment});
  }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

// Complex sample storage; every buffer handed to FftPlan must be one of these.
using ComplexBuffer = std::vector<cplx, AlignedAllocator<cplx>>;

// In-place complex DFT over a 1D or 2D row-major array, optionally batched over
// `batch` contiguous arrays. Plans are created with FFTW_ESTIMATE so the
// arithmetic is identical from run to run. Transforms are unnormalized.
class FftPlan {
 public:
  FftPlan(std::size_t n0, std::size_t n1, std::size_t batch = 1);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;

  void forward(std::span<cplx> data) const;
  void inverse(std::span<cplx> data) const;

  std::size_t size() const { return n0_ * n1_ * batch_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t n0_, n1_, batch_;
};

}  // namespace qratio
