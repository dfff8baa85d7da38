#pragma once

#include <span>

namespace ricci::detail {

// out[i] = exp(scale * in[i]). Compiled with vectorized math; inputs must be
// finite and |scale * in[i]| must stay well inside the double range.
void exp_scaled(std::span<const double> in, double scale, std::span<double> out);

}  // namespace ricci::detail
