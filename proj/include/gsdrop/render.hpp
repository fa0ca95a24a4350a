// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gsdrop/camera.hpp"
#include "gsdrop/gaussian.hpp"
#include "gsdrop/image.hpp"
#include "gsdrop/projection.hpp"

namespace gsdrop {

struct RenderOptions {
    Vec3 background{0, 0, 0};
    /// Per-pixel blending stops once transmittance falls below this value.
    double transmittance_floor = 1e-4;
    int threads = 1;
};

/// Screen-space cache for one visible Gaussian (depth-sorted).
struct Splat {
    Vec2 mean2d;
    double conic_xx, conic_xy, conic_yy;  // inverse of cov2d
    double opacity;                       // sigmoid(opacity_logit)
    Vec3 color;                           // view-evaluated SH color
    double depth;
    uint32_t source;                      // index into the cloud
};

/// Forward image plus everything the backward pass replays: the depth-sorted
/// splat cache, per-pixel contributor lists, transmittances, and the dropout
/// context the image was rendered under.
struct RenderBuffers {
    Image image;
    size_t cloud_size = 0;
    Vec3 background;
    double transmittance_floor = 1e-4;

    std::vector<Splat> splats;
    std::vector<uint32_t> offsets;     // per-pixel prefix into entries (W*H+1)
    std::vector<uint32_t> entries;     // splat ids, ascending depth per pixel
    std::vector<uint32_t> n_examined;  // entries consumed before termination
    std::vector<double> final_T;       // per-pixel transmittance after blending

    std::vector<int> sh_retain;        // per-Gaussian retained degree (empty = all L)
    std::vector<uint8_t> sh_coeff_mask;  // per-Gaussian keep mask (empty = none)
};

/// Alpha-blended forward render (front-to-back over depth-sorted Gaussians).
///
/// Effective opacity per pixel is
///   alpha_hat = m_i * min(kAlphaMax, sigmoid(opacity_logit) * exp(-q/2)),
/// contributing only while q = d^T cov2d^{-1} d <= kSupportQ. Masked
/// Gaussians (m_i = 0) are excluded entirely and receive zero gradient.
/// `sh_retain` truncates each Gaussian's SH evaluation to the given degree;
/// `sh_coeff_mask` (N * 3 * (L+1)^2 bytes) zeroes individual coefficients.
///
/// An empty cloud renders the pure background. Throws InvalidParameterError
/// for an invalid camera or mismatched mask/retain lengths.
RenderBuffers render_forward(const GaussianCloud& cloud, const Camera& camera,
                             const RenderOptions& opts = {},
                             const std::vector<uint8_t>* mask = nullptr,
                             const std::vector<int>* sh_retain = nullptr,
                             const std::vector<uint8_t>* sh_coeff_mask = nullptr);

/// Analytic gradients of sum(upstream ⊙ image) for every cloud parameter.
/// Dropped Gaussians and SH coefficients above the retained degree receive
/// exactly zero gradient. Throws InvalidParameterError on shape mismatch.
CloudGradients render_backward(const GaussianCloud& cloud, const Camera& camera,
                               const RenderBuffers& buffers, const Image& upstream,
                               int threads = 1);

/// Mean absolute difference between renders under two masks.
double render_mae(const GaussianCloud& cloud, const Camera& camera,
                  const std::vector<uint8_t>& mask_a, const std::vector<uint8_t>& mask_b,
                  const RenderOptions& opts = {});

}  // namespace gsdrop
