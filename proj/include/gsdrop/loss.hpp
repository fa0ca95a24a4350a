// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsdrop/image.hpp"

namespace gsdrop {

/// Photometric training loss: L = L1 + lambda * (1 - SSIM) by default.
/// `raw_ssim_term` switches the second term to -lambda * SSIM (identical
/// gradient, shifted value).
struct LossOptions {
    double lambda_ssim = 0.2;
    bool raw_ssim_term = false;
};

struct LossResult {
    double value = 0.0;
    double l1 = 0.0;
    double ssim = 1.0;
    Image grad;  // dL/drendered
};

/// Loss and its analytic gradient image. SSIM is skipped (treated as exact
/// match) when lambda is zero, which also permits images below the SSIM
/// window size. Throws InvalidParameterError on shape mismatch.
LossResult photometric_loss(const Image& rendered, const Image& target,
                            const LossOptions& opts = {});

}  // namespace gsdrop
