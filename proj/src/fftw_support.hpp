#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>

namespace ricci::detail {

// The FFTW planner is not thread-safe; plan execution through the new-array
// interface is.
std::mutex& fftw_planner_mutex();

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

inline FftwBuffer<double> alloc_real(std::size_t n) {
  return FftwBuffer<double>(fftw_alloc_real(n));
}

inline FftwBuffer<std::complex<double>> alloc_complex(std::size_t n) {
  return FftwBuffer<std::complex<double>>(
      reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n)));
}

inline fftw_complex* as_fftw(std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(p);
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace ricci::detail
