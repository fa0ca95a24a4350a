// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsdrop/camera.hpp"
#include "gsdrop/gaussian.hpp"
#include "gsdrop/vecmath.hpp"

namespace gsdrop {

/// Blending support cutoff: a Gaussian contributes to a pixel only while
/// d^T cov2d^{-1} d <= kSupportQ. exp(-21) ~ 7.6e-10, so truncation sits far
/// below every test tolerance. Culling and splat bounds derive from the same
/// constant, keeping the rasterizer exactly equal to a full per-pixel sum.
constexpr double kSupportQ = 42.0;

/// Low-pass term added to both diagonal entries of cov2d before inversion.
constexpr double kCovBlur = 0.3;

/// Blended opacity ceiling (keeps the backward pass finite).
constexpr double kAlphaMax = 0.999;

/// Tangent-plane clamp factor for the perspective Jacobian.
constexpr double kTanClamp = 1.3;

/// Screen-space footprint of a projected Gaussian.
struct Projected2D {
    Vec2 mean2d;
    double cov_xx = 0.0, cov_xy = 0.0, cov_yy = 0.0;  // symmetric, pixel^2
    double depth = 0.0;                                // camera-space z
    bool visible = false;
};

/// World-space covariance from the factorized parameters:
/// Sigma = R * diag(exp(s))^2 * R^T with R from the normalized quaternion.
/// Throws InvalidParameterError on non-finite input.
Mat3 build_covariance(const Vec3& log_scale, const Vec4& rotation);

/// EWA projection of one Gaussian. Marks visible=false when the camera-space
/// depth is at most near_clip or the 2D mean lies outside the image rectangle
/// expanded by sqrt(kSupportQ * lambda_max(cov2d)) pixels, which is exactly
/// the footprint radius implied by the support cutoff.
Projected2D project(const Vec3& position, const Vec3& log_scale, const Vec4& rotation,
                    const Camera& camera);

inline Projected2D project(const GaussianCloud& cloud, size_t i, const Camera& camera) {
    return project(cloud.positions[i], cloud.log_scales[i], cloud.rotations[i], camera);
}

/// Camera-space point recovered from a pixel coordinate and depth.
Vec3 unproject(const Vec2& mean2d, double depth, const Camera& camera);

/// Forward intermediates retained for the analytic backward pass.
struct ProjectionDetail {
    Projected2D proj;
    Vec3 t;             // camera-space position
    Vec4 q_raw;         // stored quaternion
    Vec4 q_unit;        // normalized quaternion
    double q_norm = 1.0;
    Mat3 R;             // rotation from q_unit
    Vec3 scale;         // exp(log_scale)
    Mat3 M;             // R * diag(scale)
    Mat3 V;             // camera-frame 3x3 covariance
    double J00 = 0, J02 = 0, J11 = 0, J12 = 0;  // sparse 2x3 Jacobian entries
    bool clamped_x = false, clamped_y = false;  // tangent clamp active
};

ProjectionDetail project_detail(const Vec3& position, const Vec3& log_scale,
                                const Vec4& rotation, const Camera& camera);

/// Gradients flowing into the projection from screen space.
struct ProjectionGrad {
    Vec2 g_mean2d{0, 0};
    // dL/dcov2d in full-matrix convention (g_cov_xy covers one off-diagonal
    // entry; the symmetric partner is accounted for by the caller).
    double g_cov_xx = 0, g_cov_xy = 0, g_cov_yy = 0;
};

/// Chains screen-space gradients back to position, log-scale, and quaternion.
/// Adds into the output vectors; the position term covers only the projection
/// path (the view-direction path of SH color is handled by the renderer).
void projection_backward(const ProjectionDetail& d, const Camera& camera,
                         const ProjectionGrad& g, Vec3* g_position, Vec3* g_log_scale,
                         Vec4* g_rotation);

}  // namespace gsdrop
