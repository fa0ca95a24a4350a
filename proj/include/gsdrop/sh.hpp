// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "gsdrop/gaussian.hpp"
#include "gsdrop/vecmath.hpp"

namespace gsdrop {

// Real SH basis constants, graphics convention (scalar-first polynomial forms).
constexpr double kSH_C0 = 0.28209479177387814;  // 1/(2*sqrt(pi))
constexpr double kSH_C1 = 0.4886025119029199;

/// Evaluate the 16 real SH basis functions of degree 0..3 at a unit direction.
/// Entries above (degree+1)^2 are left untouched.
void sh_basis(const Vec3& dir, int degree, double* out);

/// Basis values plus their gradients with respect to the direction vector.
void sh_basis_with_grad(const Vec3& dir, int degree, double* out, Vec3* grad_out);

/// View-dependent color from per-channel SH coefficients.
///
/// Coefficients of degree above retain_degree contribute zero. The result is
/// the SH sum plus the conventional 0.5 offset, clamped below at 0 per channel
/// (no upper clamp; tone mapping is the image writer's concern).
///
/// `sh` is channel-major: 3 blocks of (L+1)^2 coefficients.
/// Throws InvalidParameterError when retain_degree is outside [0, L] or
/// view_dir is not unit-norm within 1e-6.
Vec3 eval_sh(const double* sh, int max_degree, const Vec3& view_dir, int retain_degree);

/// Everything the rasterizer backward pass needs from one SH evaluation.
struct ShEval {
    Vec3 color;              // clamped output
    Vec3 pre_clamp;          // SH sum + 0.5 before the lower clamp
    Vec3 dcolor_ddir[3];     // per channel, gradient of the pre-clamp value
    double basis[16];        // basis values (entries beyond the active count are 0)
    int active_coeffs = 0;   // (retain_degree+1)^2
};

/// Internal evaluation used by the renderer: assumes `dir` is already unit
/// norm, optionally applies a per-coefficient keep mask (3*(L+1)^2 bytes,
/// channel-major; nullptr keeps everything).
ShEval eval_sh_detail(const double* sh, int max_degree, const Vec3& dir, int retain_degree,
                      const uint8_t* coeff_mask);

}  // namespace gsdrop
