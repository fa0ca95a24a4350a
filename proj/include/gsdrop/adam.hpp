// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "gsdrop/gaussian.hpp"

namespace gsdrop {

/// Per-group learning rates. Position follows an exponential decay from
/// position_init * scene_extent to position_final * scene_extent over the
/// training run; all other groups are constant.
struct LearningRates {
    double position_init = 1.6e-4;
    double position_final = 1.6e-6;
    double sh_dc = 2.5e-3;
    double sh_rest = 2.5e-3 / 20.0;
    double opacity = 0.05;
    double scale = 5e-3;
    double rotation = 1e-3;

    void validate() const;
};

/// Adam over the cloud's parameter groups: beta1 0.9, beta2 0.999,
/// epsilon 1e-15, bias-corrected moments.
class AdamOptimizer {
public:
    AdamOptimizer(const GaussianCloud& cloud, const LearningRates& lrs, double scene_extent,
                  int total_iters);

    /// One update. Throws TrainingDivergenceError (with iteration context)
    /// when any gradient is non-finite.
    void step(GaussianCloud& cloud, const CloudGradients& grads, int iteration);

    /// Keep only the moment rows of surviving Gaussians (ascending indices),
    /// mirroring GaussianCloud::compact.
    void compact(const std::vector<uint32_t>& keep, const GaussianCloud& cloud_after);

    double position_lr(int iteration) const;

    // Moment views for alignment checks in tests.
    const std::vector<double>& first_moments_position() const { return m_pos_; }
    const std::vector<double>& second_moments_position() const { return v_pos_; }
    const std::vector<double>& first_moments_sh() const { return m_sh_; }

    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-15;

private:
    LearningRates lrs_;
    double scene_extent_;
    int total_iters_;
    int64_t step_count_ = 0;
    int sh_coeffs_ = 1;

    std::vector<double> m_pos_, v_pos_;      // 3 per Gaussian
    std::vector<double> m_scale_, v_scale_;  // 3 per Gaussian
    std::vector<double> m_rot_, v_rot_;      // 4 per Gaussian
    std::vector<double> m_op_, v_op_;        // 1 per Gaussian
    std::vector<double> m_sh_, v_sh_;        // 3*(L+1)^2 per Gaussian
};

}  // namespace gsdrop
