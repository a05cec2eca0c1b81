#include "qratio/fft.hpp"

#include <fftw3.h>

#include <cstdint>
#include <mutex>
#include <stdexcept>

namespace qratio {

namespace {

// The FFTW planner is not re-entrant; plan execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::span<cplx> data) {
  // new-array execution requires the planning alignment (64 bytes)
  if (reinterpret_cast<std::uintptr_t>(data.data()) % kBufferAlignment != 0) {
    throw std::invalid_argument("FftPlan: buffer is not 64-byte aligned");
  }
  return reinterpret_cast<fftw_complex*>(data.data());
}

}  // namespace

struct FftPlan::Impl {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (fwd != nullptr) fftw_destroy_plan(fwd);
    if (inv != nullptr) fftw_destroy_plan(inv);
  }
};

FftPlan::FftPlan(std::size_t n0, std::size_t n1, std::size_t batch)
    : impl_(std::make_unique<Impl>()), n0_(n0), n1_(n1), batch_(batch) {
  if (n0 == 0 || n1 == 0 || batch == 0) throw std::invalid_argument("FftPlan: empty transform");
  ComplexBuffer scratch(size());
  const int rank = n1 == 1 ? 1 : 2;
  const int dims[2] = {static_cast<int>(n0), static_cast<int>(n1)};
  const int dist = static_cast<int>(n0 * n1);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(planner_mutex());
  impl_->fwd = fftw_plan_many_dft(rank, dims, static_cast<int>(batch), p, nullptr, 1, dist, p, nullptr,
                                  1, dist, FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_many_dft(rank, dims, static_cast<int>(batch), p, nullptr, 1, dist, p, nullptr,
                                  1, dist, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (impl_->fwd == nullptr || impl_->inv == nullptr) throw std::runtime_error("FFTW planning failed");
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::forward(std::span<cplx> data) const {
  if (data.size() != size()) throw std::invalid_argument("FftPlan: size mismatch");
  fftw_execute_dft(impl_->fwd, as_fftw(data), as_fftw(data));
}

void FftPlan::inverse(std::span<cplx> data) const {
  if (data.size() != size()) throw std::invalid_argument("FftPlan: size mismatch");
  fftw_execute_dft(impl_->inv, as_fftw(data), as_fftw(data));
}

}  // namespace qratio
