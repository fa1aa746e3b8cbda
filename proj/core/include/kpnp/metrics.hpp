#pragma once

#include "kpnp/image.hpp"

namespace kpnp {

/// 10 log10(1 / MSE) with peak 1. Returns +infinity when the images are equal.
double psnr(const Image& x, const Image& ref);

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2, dynamic range 1 and symmetric boundary padding.
/// Requires min(rows, cols) >= 11.
double ssim(const Image& x, const Image& ref);

}  // namespace kpnp
