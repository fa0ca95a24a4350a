// SPDX-License-Identifier: Apache-2.0
#include "gsdrop/loss.hpp"

#include <cmath>

#include "gsdrop/metrics.hpp"

namespace gsdrop {

LossResult photometric_loss(const Image& rendered, const Image& target,
                            const LossOptions& opts) {
    require_same_shape(rendered, target, "photometric_loss");
    LossResult res;
    res.grad = Image(rendered.width, rendered.height, 0.0);

    const double inv_count = 1.0 / double(rendered.element_count());
    for (size_t i = 0; i < rendered.data.size(); ++i) {
        const double diff = rendered.data[i] - target.data[i];
        res.l1 += std::abs(diff);
        res.grad.data[i] = (diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0)) * inv_count;
    }
    res.l1 *= inv_count;
    res.value = res.l1;

    if (opts.lambda_ssim != 0.0) {
        Image ssim_grad;
        res.ssim = ssim_with_grad(rendered, target, &ssim_grad);
        res.value += opts.raw_ssim_term ? -opts.lambda_ssim * res.ssim
                                        : opts.lambda_ssim * (1.0 - res.ssim);
        for (size_t i = 0; i < res.grad.data.size(); ++i)
            res.grad.data[i] -= opts.lambda_ssim * ssim_grad.data[i];
    }
    return res;
}

}  // namespace gsdrop
