#pragma once

#include <span>

#include "kpnp/forward_op.hpp"
#include "kpnp/image.hpp"

namespace kpnp {

enum class Task { inpaint, deblur, superres };

const char* to_string(Task task);

/// Guide image for the kernel denoiser, computed once from the observation:
///  - inpaint: zero-fill the missing pixels, then a 3x3 median filter
///  - deblur: the observation reshaped to the image grid
///  - superres: bicubic upsampling by the operator's factor
/// Throws ParameterError when the operator kind does not match the task.
Image make_guide(Task task, std::span<const double> observed, const ForwardOp& op);

/// 3x3 median filter with symmetric boundary padding.
Image median3x3(const Image& img);

/// Keys (a = -0.5) bicubic upsampling. Output pixel (r, c) samples the
/// input at (r / factor, c / factor), matching decimation phase (0, 0).
Image bicubic_upsample(const Image& img, std::size_t factor);

/// A^T b reshaped to the image grid (zero-filled for inpainting).
Image backprojection(std::span<const double> observed, const ForwardOp& op);

}  // namespace kpnp
