#include "kernels.hpp"

#include <cmath>
#include <cstddef>

namespace ricci::detail {

void exp_scaled(std::span<const double> in, double scale, std::span<double> out) {
  const double* __restrict src = in.data();
  double* __restrict dst = out.data();
  const std::size_t n = in.size();
  for (std::size_t i = 0; i < n; ++i) dst[i] = std::exp(scale * src[i]);
}

}  // namespace ricci::detail
