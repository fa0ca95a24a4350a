// SPDX-License-Identifier: Apache-2.0
//
// Independent test oracles: a brute-force per-pixel blending reference that
// evaluates the compositing sum over every depth-sorted Gaussian (no splat
// binning, no bounding boxes), finite-difference helpers, and random scene
// builders. Deliberately kept separate from the rasterizer implementation.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gsdrop/camera.hpp"
#include "gsdrop/image.hpp"
#include "gsdrop/projection.hpp"
#include "gsdrop/render.hpp"
#include "gsdrop/rng.hpp"
#include "gsdrop/sh.hpp"

namespace gsdrop::testing {

/// Per-pixel brute-force reference of the front-to-back compositing sum.
/// Walks all N Gaussians in depth order at every pixel.
inline Image oracle_render(const GaussianCloud& cloud, const Camera& cam,
                           const RenderOptions& opts = {},
                           const std::vector<uint8_t>* mask = nullptr,
                           const std::vector<int>* sh_retain = nullptr,
                           const std::vector<uint8_t>* coeff_mask = nullptr) {
    struct Item {
        double depth;
        size_t index;
        Vec2 mean2d;
        double icov_xx, icov_xy, icov_yy;
        double opacity;
        Vec3 color;
    };
    std::vector<Item> items;
    const Vec3 cam_center = cam.center();
    for (size_t i = 0; i < cloud.size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        const Vec3 t = cam.to_camera(cloud.positions[i]);
        if (t.z <= cam.near_clip) continue;
        const ProjectionDetail d =
            project_detail(cloud.positions[i], cloud.log_scales[i], cloud.rotations[i], cam);
        Item it;
        it.depth = t.z;
        it.index = i;
        it.mean2d = d.proj.mean2d;
        const double det = d.proj.cov_xx * d.proj.cov_yy - d.proj.cov_xy * d.proj.cov_xy;
        it.icov_xx = d.proj.cov_yy / det;
        it.icov_xy = -d.proj.cov_xy / det;
        it.icov_yy = d.proj.cov_xx / det;
        it.opacity = sigmoid(cloud.opacity_logits[i]);
        Vec3 rel = cloud.positions[i] - cam_center;
        const double r = norm(rel);
        const Vec3 dir = r < 1e-12 ? Vec3{0, 0, 1} : rel / r;
        const int retain = sh_retain ? (*sh_retain)[i] : cloud.max_degree;
        const uint8_t* cm = coeff_mask ? coeff_mask->data() + i * cloud.sh_stride() : nullptr;
        it.color = eval_sh_detail(cloud.sh_at(i), cloud.max_degree, dir, retain, cm).color;
        items.push_back(it);
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.index < b.index;
    });

    Image img(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            double T = 1.0;
            Vec3 color{0, 0, 0};
            for (const Item& it : items) {
                const double dx = it.mean2d.x - px, dy = it.mean2d.y - py;
                const double q =
                    it.icov_xx * dx * dx + 2.0 * it.icov_xy * dx * dy + it.icov_yy * dy * dy;
                if (q > kSupportQ || q < 0.0) continue;
                const double alpha = std::min(kAlphaMax, it.opacity * std::exp(-0.5 * q));
                color += it.color * (alpha * T);
                T *= 1.0 - alpha;
                if (T < opts.transmittance_floor) break;
            }
            img.set_pixel(x, y, color + opts.background * T);
        }
    }
    return img;
}

/// Random scene kept away from non-differentiable configurations: distinct
/// depths, mid-range opacities, colors clear of the lower clamp.
inline GaussianCloud random_scene(Rng& rng, size_t n, int degree = 3) {
    GaussianCloud cloud;
    cloud.resize(n, degree);
    const int coeffs = cloud.coeffs_per_channel();
    // Stratified depths guarantee pairwise separation of at least
    // 0.3*2.5/n, keeping the sort order stable under FD perturbations.
    std::vector<double> depths(n);
    for (size_t i = 0; i < n; ++i)
        depths[i] = 1.5 + (double(i) + rng.uniform(0.15, 0.85)) * 2.5 / double(n);
    rng.shuffle(depths);
    for (size_t i = 0; i < n; ++i) {
        cloud.positions[i] = {rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), depths[i]};
        cloud.log_scales[i] = {std::log(rng.uniform(0.03, 0.15)),
                               std::log(rng.uniform(0.03, 0.15)),
                               std::log(rng.uniform(0.03, 0.15))};
        Vec4 q{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        if (norm(q) < 0.3) q = Vec4{1, 0, 0, 0};
        cloud.rotations[i] = q;
        cloud.opacity_logits[i] = rng.uniform(-2.5, 1.5);
        for (int c = 0; c < 3; ++c) {
            double* sh = cloud.sh_at(i) + c * coeffs;
            sh[0] = (rng.uniform(0.2, 0.8) - 0.5) / kSH_C0;
            for (int j = 1; j < coeffs; ++j) sh[j] = rng.uniform(-0.01, 0.01);
        }
    }
    return cloud;
}

inline Camera test_camera(int size = 8) {
    Camera cam;
    cam.rotation = Mat3::identity();
    cam.translation = {0, 0, 0};
    cam.fx = cam.fy = 1.25 * size;
    cam.cx = cam.cy = 0.5 * size;
    cam.width = cam.height = size;
    return cam;
}

inline double weighted_sum(const Image& img, const Image& weights) {
    double s = 0.0;
    for (size_t i = 0; i < img.data.size(); ++i) s += img.data[i] * weights.data[i];
    return s;
}

struct FdReport {
    double worst_rel = 0.0;
    double worst_analytic = 0.0, worst_fd = 0.0;
    int checked = 0;
    const char* worst_param = "";
};

/// Relative error with an absolute floor, mirroring the gradient tolerance.
inline void fd_update(FdReport& rep, double analytic, double fd, const char* name,
                      double floor = 1e-7) {
    const double denom = std::max({std::abs(analytic), std::abs(fd), floor / 1e-3});
    const double rel = std::abs(analytic - fd) / denom;
    rep.checked++;
    if (rel > rep.worst_rel) {
        rep.worst_rel = rel;
        rep.worst_analytic = analytic;
        rep.worst_fd = fd;
        rep.worst_param = name;
    }
}

/// Central finite differences of sum(weights ⊙ render(cloud)) against the
/// analytic backward pass, over every parameter of every Gaussian.
inline FdReport finite_difference_check(GaussianCloud cloud, const Camera& cam,
                                        const RenderOptions& opts, const Image& weights,
                                        double h = 1e-4,
                                        const std::vector<uint8_t>* mask = nullptr,
                                        const std::vector<int>* sh_retain = nullptr) {
    const RenderBuffers buf = render_forward(cloud, cam, opts, mask, sh_retain);
    const CloudGradients g = render_backward(cloud, cam, buf, weights, opts.threads);
    auto loss = [&](const GaussianCloud& c) {
        return weighted_sum(render_forward(c, cam, opts, mask, sh_retain).image, weights);
    };
    FdReport rep;
    auto probe = [&](double* slot, double analytic, const char* name) {
        const double saved = *slot;
        *slot = saved + h;
        const double up = loss(cloud);
        *slot = saved - h;
        const double dn = loss(cloud);
        *slot = saved;
        fd_update(rep, analytic, (up - dn) / (2.0 * h), name);
    };
    for (size_t i = 0; i < cloud.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
            probe(&cloud.positions[i][k], g.positions[i][k], "position");
            probe(&cloud.log_scales[i][k], g.log_scales[i][k], "log_scale");
        }
        for (int k = 0; k < 4; ++k)
            probe(&cloud.rotations[i][k], g.rotations[i][k], "rotation");
        probe(&cloud.opacity_logits[i], g.opacity_logits[i], "opacity_logit");
        for (int c = 0; c < cloud.sh_stride(); ++c)
            probe(&cloud.sh[i * cloud.sh_stride() + c], g.sh[i * cloud.sh_stride() + c], "sh");
    }
    return rep;
}

}  // namespace gsdrop::testing
