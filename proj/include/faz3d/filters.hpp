#pragma once

#include <span>
#include <vector>

#include "faz3d/grid.hpp"

namespace faz3d {

/// Sampled Gaussian, normalized to unit sum, radius ceil(truncate * sigma).
[[nodiscard]] std::vector<float> gaussian_kernel(double sigma, double truncate = 4.0);

/// How a 1D kernel is applied. `difference` evaluates sum_k w_k (I[x+k] - I[x]),
/// which equals the direct form for zero-sum kernels but is exactly 0 on flat input.
enum class KernelForm { direct, difference };

/// 1D convolution along x / y with replicate borders. Kernel length must be odd.
[[nodiscard]] ScalarImage convolve_x(const ScalarImage& img, std::span<const float> kernel,
                                     KernelForm form = KernelForm::direct);
[[nodiscard]] ScalarImage convolve_y(const ScalarImage& img, std::span<const float> kernel,
                                     KernelForm form = KernelForm::direct);

[[nodiscard]] ScalarImage gaussian_blur(const ScalarImage& img, double sigma);

}  // namespace faz3d
