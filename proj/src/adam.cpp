// SPDX-License-Identifier: Apache-2.0
#include "gsdrop/adam.hpp"

#include <cmath>
#include <string>

#include "gsdrop/errors.hpp"

namespace gsdrop {

void LearningRates::validate() const {
    for (double lr : {position_init, position_final, sh_dc, sh_rest, opacity, scale, rotation})
        if (!(lr > 0.0)) throw InvalidParameterError("LearningRates: rates must be positive");
}

AdamOptimizer::AdamOptimizer(const GaussianCloud& cloud, const LearningRates& lrs,
                             double scene_extent, int total_iters)
    : lrs_(lrs), scene_extent_(scene_extent), total_iters_(total_iters) {
    lrs_.validate();
    if (!(scene_extent > 0.0))
        throw InvalidParameterError("AdamOptimizer: scene_extent must be positive");
    const size_t n = cloud.size();
    sh_coeffs_ = cloud.coeffs_per_channel();
    m_pos_.assign(n * 3, 0.0);
    v_pos_.assign(n * 3, 0.0);
    m_scale_.assign(n * 3, 0.0);
    v_scale_.assign(n * 3, 0.0);
    m_rot_.assign(n * 4, 0.0);
    v_rot_.assign(n * 4, 0.0);
    m_op_.assign(n, 0.0);
    v_op_.assign(n, 0.0);
    m_sh_.assign(cloud.sh.size(), 0.0);
    v_sh_.assign(cloud.sh.size(), 0.0);
}

double AdamOptimizer::position_lr(int iteration) const {
    const double t = clamp(double(iteration) / double(total_iters_), 0.0, 1.0);
    const double init = lrs_.position_init * scene_extent_;
    const double final_lr = lrs_.position_final * scene_extent_;
    return init * std::pow(final_lr / init, t);
}

namespace {

inline void adam_update(double& param, double& m, double& v, double grad, double lr,
                        double bias1, double bias2) {
    m = AdamOptimizer::kBeta1 * m + (1.0 - AdamOptimizer::kBeta1) * grad;
    v = AdamOptimizer::kBeta2 * v + (1.0 - AdamOptimizer::kBeta2) * grad * grad;
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    param -= lr * m_hat / (std::sqrt(v_hat) + AdamOptimizer::kEpsilon);
}

}  // namespace

void AdamOptimizer::step(GaussianCloud& cloud, const CloudGradients& grads, int iteration) {
    const size_t n = cloud.size();
    if (grads.positions.size() != n || grads.sh.size() != cloud.sh.size())
        throw InvalidParameterError("AdamOptimizer: gradient shapes do not match the cloud");

    for (size_t i = 0; i < n; ++i) {
        const bool ok = is_finite(grads.positions[i]) && is_finite(grads.log_scales[i]) &&
                        is_finite(grads.rotations[i]) && std::isfinite(grads.opacity_logits[i]);
        if (!ok)
            throw TrainingDivergenceError("non-finite gradient at iteration " +
                                          std::to_string(iteration));
    }
    for (double g : grads.sh)
        if (!std::isfinite(g))
            throw TrainingDivergenceError("non-finite SH gradient at iteration " +
                                          std::to_string(iteration));

    ++step_count_;
    const double bias1 = 1.0 - std::pow(kBeta1, double(step_count_));
    const double bias2 = 1.0 - std::pow(kBeta2, double(step_count_));
    const double pos_lr = position_lr(iteration);

    for (size_t i = 0; i < n; ++i) {
        for (int k = 0; k < 3; ++k) {
            adam_update(cloud.positions[i][k], m_pos_[i * 3 + k], v_pos_[i * 3 + k],
                        grads.positions[i][k], pos_lr, bias1, bias2);
            adam_update(cloud.log_scales[i][k], m_scale_[i * 3 + k], v_scale_[i * 3 + k],
                        grads.log_scales[i][k], lrs_.scale, bias1, bias2);
        }
        for (int k = 0; k < 4; ++k)
            adam_update(cloud.rotations[i][k], m_rot_[i * 4 + k], v_rot_[i * 4 + k],
                        grads.rotations[i][k], lrs_.rotation, bias1, bias2);
        adam_update(cloud.opacity_logits[i], m_op_[i], v_op_[i], grads.opacity_logits[i],
                    lrs_.opacity, bias1, bias2);
        const size_t base = i * size_t(3 * sh_coeffs_);
        for (int c = 0; c < 3; ++c) {
            for (int j = 0; j < sh_coeffs_; ++j) {
                const size_t idx = base + size_t(c) * sh_coeffs_ + j;
                adam_update(cloud.sh[idx], m_sh_[idx], v_sh_[idx], grads.sh[idx],
                            j == 0 ? lrs_.sh_dc : lrs_.sh_rest, bias1, bias2);
            }
        }
    }
}

void AdamOptimizer::compact(const std::vector<uint32_t>& keep,
                            const GaussianCloud& cloud_after) {
    auto compact_array = [&](std::vector<double>& arr, size_t stride) {
        std::vector<double> out(keep.size() * stride);
        for (size_t j = 0; j < keep.size(); ++j)
            for (size_t c = 0; c < stride; ++c) out[j * stride + c] = arr[keep[j] * stride + c];
        arr = std::move(out);
    };
    compact_array(m_pos_, 3);
    compact_array(v_pos_, 3);
    compact_array(m_scale_, 3);
    compact_array(v_scale_, 3);
    compact_array(m_rot_, 4);
    compact_array(v_rot_, 4);
    compact_array(m_op_, 1);
    compact_array(v_op_, 1);
    const size_t sh_stride = size_t(3) * sh_coeffs_;
    compact_array(m_sh_, sh_stride);
    compact_array(v_sh_, sh_stride);
    if (m_pos_.size() != cloud_after.size() * 3)
        throw InvalidParameterError("AdamOptimizer::compact: size mismatch after compaction");
}

}  // namespace gsdrop
