// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "gsdrop/errors.hpp"
#include "gsdrop/vecmath.hpp"

namespace gsdrop {

constexpr int kMaxShDegree = 3;

/// Number of SH coefficients per color channel for a given degree: (d+1)^2.
constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

/// Structure-of-arrays scene representation for N Gaussians.
///
/// Parameters live in their pre-activation spaces:
///   - log_scales:     exp() gives the per-axis standard deviation
///   - rotations:      raw quaternions (w,x,y,z), normalized on use
///   - opacity_logits: sigmoid() gives opacity in (0,1)
///   - sh:             per Gaussian, channel-major [3][(L+1)^2]
struct GaussianCloud {
    int max_degree = kMaxShDegree;  // L

    std::vector<Vec3> positions;
    std::vector<Vec3> log_scales;
    std::vector<Vec4> rotations;
    std::vector<double> opacity_logits;
    std::vector<double> sh;  // size N * 3 * (L+1)^2

    size_t size() const { return positions.size(); }
    int coeffs_per_channel() const { return sh_coeff_count(max_degree); }
    int sh_stride() const { return 3 * coeffs_per_channel(); }

    double* sh_at(size_t i) { return sh.data() + i * sh_stride(); }
    const double* sh_at(size_t i) const { return sh.data() + i * sh_stride(); }

    void resize(size_t n, int degree) {
        if (degree < 0 || degree > kMaxShDegree)
            throw InvalidParameterError("GaussianCloud: max_degree must be in [0,3]");
        max_degree = degree;
        positions.assign(n, Vec3{});
        log_scales.assign(n, Vec3{});
        rotations.assign(n, Vec4{1, 0, 0, 0});
        opacity_logits.assign(n, 0.0);
        sh.assign(n * static_cast<size_t>(sh_stride()), 0.0);
    }

    /// All per-Gaussian arrays must have identical length.
    void validate() const {
        const size_t n = positions.size();
        if (log_scales.size() != n || rotations.size() != n || opacity_logits.size() != n ||
            sh.size() != n * static_cast<size_t>(sh_stride()))
            throw InvalidParameterError("GaussianCloud: parameter array lengths disagree");
    }

    /// Keep only the rows whose index appears in `keep` (ascending order).
    void compact(const std::vector<uint32_t>& keep) {
        GaussianCloud out;
        out.resize(keep.size(), max_degree);
        const int stride = sh_stride();
        for (size_t j = 0; j < keep.size(); ++j) {
            const size_t i = keep[j];
            out.positions[j] = positions[i];
            out.log_scales[j] = log_scales[i];
            out.rotations[j] = rotations[i];
            out.opacity_logits[j] = opacity_logits[i];
            for (int c = 0; c < stride; ++c) out.sh[j * stride + c] = sh[i * stride + c];
        }
        *this = std::move(out);
    }
};

/// Per-parameter gradients, shaped like the cloud they were computed for.
struct CloudGradients {
    std::vector<Vec3> positions;
    std::vector<Vec3> log_scales;
    std::vector<Vec4> rotations;
    std::vector<double> opacity_logits;
    std::vector<double> sh;

    static CloudGradients zeros_like(const GaussianCloud& cloud) {
        CloudGradients g;
        g.positions.assign(cloud.size(), Vec3{0, 0, 0});
        g.log_scales.assign(cloud.size(), Vec3{0, 0, 0});
        g.rotations.assign(cloud.size(), Vec4{0, 0, 0, 0});
        g.opacity_logits.assign(cloud.size(), 0.0);
        g.sh.assign(cloud.sh.size(), 0.0);
        return g;
    }
};

/// Total parameter count when only SH degrees <= retain_degree are kept:
/// N * (3 position + 3 scale + 4 rotation + 1 opacity + 3*(d+1)^2 SH).
inline int64_t count_parameters(const GaussianCloud& cloud, int retain_degree) {
    if (retain_degree < 0 || retain_degree > cloud.max_degree)
        throw InvalidParameterError("count_parameters: retain_degree out of [0, L]");
    return static_cast<int64_t>(cloud.size()) *
           (3 + 3 + 4 + 1 + 3 * sh_coeff_count(retain_degree));
}

}  // namespace gsdrop
