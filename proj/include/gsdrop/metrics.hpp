// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsdrop/image.hpp"

namespace gsdrop {

/// SSIM windowing constants: 11x11 Gaussian window, sigma 1.5, stabilizers
/// on the [0,1] dynamic range.
constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

struct ImageMetrics {
    double psnr = 0.0;  // dB; +infinity when images are identical
    double ssim = 0.0;
    double mae = 0.0;
};

/// Peak signal-to-noise ratio in dB over images clamped to [0,1].
/// Returns +infinity for identical images.
double psnr(const Image& a, const Image& b);

/// Mean structural similarity, per channel then averaged. Uses an 11x11
/// Gaussian window (sigma 1.5) applied with zero padding at the borders.
/// Throws InvalidParameterError when either dimension is below the window.
double ssim(const Image& a, const Image& b);

/// SSIM plus its gradient with respect to the first image.
double ssim_with_grad(const Image& a, const Image& b, Image* grad_a);

/// Mean absolute per-element difference.
double mae(const Image& a, const Image& b);

inline ImageMetrics compute_metrics(const Image& a, const Image& b) {
    return ImageMetrics{psnr(a, b), ssim(a, b), mae(a, b)};
}

}  // namespace gsdrop
