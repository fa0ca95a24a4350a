// SPDX-License-Identifier: Apache-2.0
#include "gsdrop/render.hpp"

#include <algorithm>
#include <cmath>

#include "gsdrop/errors.hpp"
#include "gsdrop/metrics.hpp"
#include "gsdrop/sh.hpp"
#include "gsdrop/threading.hpp"

namespace gsdrop {

namespace {

constexpr size_t kMaxBinEntries = 200'000'000;  // resource guard, ~800 MB

struct PixelRect {
    int x0, x1, y0, y1;  // inclusive pixel ranges; empty when x0 > x1
};

/// Pixels whose centers can fall inside the support ellipse of a splat.
PixelRect support_rect(const Vec2& mean, double cov_xx, double cov_yy, int w, int h) {
    // Max |dx| on the contour q = kSupportQ is sqrt(kSupportQ * cov_xx).
    const double hx = std::sqrt(kSupportQ * cov_xx);
    const double hy = std::sqrt(kSupportQ * cov_yy);
    PixelRect r;
    r.x0 = std::max(0, (int)std::ceil(mean.x - hx - 0.5));
    r.x1 = std::min(w - 1, (int)std::floor(mean.x + hx - 0.5));
    r.y0 = std::max(0, (int)std::ceil(mean.y - hy - 0.5));
    r.y1 = std::min(h - 1, (int)std::floor(mean.y + hy - 0.5));
    return r;
}

Vec3 view_direction(const Vec3& position, const Vec3& cam_center) {
    const Vec3 rel = position - cam_center;
    const double r = norm(rel);
    if (r < 1e-12) return Vec3{0, 0, 1};
    return rel / r;
}

}  // namespace

RenderBuffers render_forward(const GaussianCloud& cloud, const Camera& camera,
                             const RenderOptions& opts, const std::vector<uint8_t>* mask,
                             const std::vector<int>* sh_retain,
                             const std::vector<uint8_t>* sh_coeff_mask) {
    camera.validate();
    cloud.validate();
    const size_t n = cloud.size();
    if (mask && mask->size() != n)
        throw InvalidParameterError("render_forward: mask length mismatch");
    if (sh_retain && sh_retain->size() != n)
        throw InvalidParameterError("render_forward: sh_retain length mismatch");
    if (sh_coeff_mask && sh_coeff_mask->size() != n * size_t(cloud.sh_stride()))
        throw InvalidParameterError("render_forward: sh_coeff_mask length mismatch");

    const int w = camera.width, h = camera.height;
    RenderBuffers buf;
    buf.cloud_size = n;
    buf.background = opts.background;
    buf.transmittance_floor = opts.transmittance_floor;
    buf.image = Image(w, h);
    buf.final_T.assign(size_t(w) * h, 1.0);
    buf.n_examined.assign(size_t(w) * h, 0);
    buf.offsets.assign(size_t(w) * h + 1, 0);
    if (sh_retain) buf.sh_retain = *sh_retain;
    if (sh_coeff_mask) buf.sh_coeff_mask = *sh_coeff_mask;

    const Vec3 cam_center = camera.center();

    // Project, cull, and evaluate view-dependent colors.
    struct Candidate {
        Splat splat;
        PixelRect rect;
    };
    std::vector<Candidate> cands;
    cands.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        if (mask && !(*mask)[i]) continue;
        int retain = cloud.max_degree;
        if (sh_retain) {
            retain = (*sh_retain)[i];
            if (retain < 0 || retain > cloud.max_degree)
                throw InvalidParameterError("render_forward: sh_retain entry out of [0, L]");
        }
        const ProjectionDetail d = project_detail(cloud.positions[i], cloud.log_scales[i],
                                                  cloud.rotations[i], camera);
        if (!d.proj.visible) continue;

        Candidate c;
        c.rect = support_rect(d.proj.mean2d, d.proj.cov_xx, d.proj.cov_yy, w, h);
        if (c.rect.x0 > c.rect.x1 || c.rect.y0 > c.rect.y1) continue;

        const double det = d.proj.cov_xx * d.proj.cov_yy - d.proj.cov_xy * d.proj.cov_xy;
        c.splat.mean2d = d.proj.mean2d;
        c.splat.conic_xx = d.proj.cov_yy / det;
        c.splat.conic_xy = -d.proj.cov_xy / det;
        c.splat.conic_yy = d.proj.cov_xx / det;
        c.splat.opacity = sigmoid(cloud.opacity_logits[i]);
        c.splat.depth = d.proj.depth;
        c.splat.source = static_cast<uint32_t>(i);
        const Vec3 dir = view_direction(cloud.positions[i], cam_center);
        const uint8_t* cm =
            sh_coeff_mask ? sh_coeff_mask->data() + i * cloud.sh_stride() : nullptr;
        c.splat.color = eval_sh_detail(cloud.sh_at(i), cloud.max_degree, dir, retain, cm).color;
        cands.push_back(c);
    }

    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.splat.depth != b.splat.depth) return a.splat.depth < b.splat.depth;
        return a.splat.source < b.splat.source;
    });

    buf.splats.resize(cands.size());
    for (size_t s = 0; s < cands.size(); ++s) buf.splats[s] = cands[s].splat;

    // Bin splats into per-pixel lists (two-pass prefix layout). Iterating in
    // depth order makes each pixel's list depth-sorted for free.
    size_t total = 0;
    for (const Candidate& c : cands) {
        total += size_t(c.rect.x1 - c.rect.x0 + 1) * size_t(c.rect.y1 - c.rect.y0 + 1);
        if (total > kMaxBinEntries)
            throw Error("render_forward: splat footprint exceeds the binning budget");
    }
    std::vector<uint32_t> counts(size_t(w) * h, 0);
    for (const Candidate& c : cands)
        for (int y = c.rect.y0; y <= c.rect.y1; ++y)
            for (int x = c.rect.x0; x <= c.rect.x1; ++x) counts[size_t(y) * w + x]++;
    buf.offsets[0] = 0;
    for (size_t p = 0; p < size_t(w) * h; ++p) buf.offsets[p + 1] = buf.offsets[p] + counts[p];
    buf.entries.resize(total);
    std::vector<uint32_t> cursor(buf.offsets.begin(), buf.offsets.end() - 1);
    for (size_t s = 0; s < cands.size(); ++s) {
        const PixelRect& r = cands[s].rect;
        for (int y = r.y0; y <= r.y1; ++y)
            for (int x = r.x0; x <= r.x1; ++x)
                buf.entries[cursor[size_t(y) * w + x]++] = static_cast<uint32_t>(s);
    }

    // Front-to-back blending, parallel over rows.
    parallel_chunks(h, opts.threads, [&](int, int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                const size_t p = size_t(y) * w + x;
                const double px = x + 0.5, py = y + 0.5;
                double T = 1.0;
                Vec3 color{0, 0, 0};
                uint32_t idx = buf.offsets[p];
                const uint32_t end = buf.offsets[p + 1];
                for (; idx < end; ++idx) {
                    const Splat& s = buf.splats[buf.entries[idx]];
                    const double dx = s.mean2d.x - px, dy = s.mean2d.y - py;
                    const double q = s.conic_xx * dx * dx + 2.0 * s.conic_xy * dx * dy +
                                     s.conic_yy * dy * dy;
                    if (q > kSupportQ || q < 0.0) continue;
                    const double alpha =
                        std::min(kAlphaMax, s.opacity * std::exp(-0.5 * q));
                    color += s.color * (alpha * T);
                    T *= 1.0 - alpha;
                    if (T < opts.transmittance_floor) {
                        ++idx;
                        break;
                    }
                }
                buf.n_examined[p] = idx - buf.offsets[p];
                buf.final_T[p] = T;
                buf.image.set_pixel(x, y, color + opts.background * T);
            }
        }
    });
    return buf;
}

CloudGradients render_backward(const GaussianCloud& cloud, const Camera& camera,
                               const RenderBuffers& buffers, const Image& upstream,
                               int threads) {
    cloud.validate();
    if (buffers.cloud_size != cloud.size())
        throw InvalidParameterError("render_backward: buffers built for a different cloud");
    if (upstream.width != camera.width || upstream.height != camera.height)
        throw InvalidParameterError("render_backward: upstream gradient shape mismatch");

    CloudGradients grads = CloudGradients::zeros_like(cloud);
    const size_t n_splats = buffers.splats.size();
    if (n_splats == 0) return grads;
    const int w = camera.width, h = camera.height;

    // Per-splat screen-space accumulators: color(3), mean2d(2), conic(3),
    // sigmoid-opacity(1). Chunked per thread, reduced in fixed order.
    const int n_threads = std::max(1, threads);
    const int n_chunks = std::min(n_threads, h);
    std::vector<std::vector<double>> acc{size_t(n_chunks)};
    for (auto& a : acc) a.assign(n_splats * 9, 0.0);

    parallel_chunks(h, n_threads, [&](int chunk, int y0, int y1) {
        double* A = acc[chunk].data();
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                const size_t p = size_t(y) * w + x;
                const uint32_t begin = buffers.offsets[p];
                const uint32_t examined = buffers.n_examined[p];
                if (examined == 0) continue;
                const double px = x + 0.5, py = y + 0.5;
                const Vec3 wgt = upstream.pixel(x, y);
                const double T_fin = buffers.final_T[p];
                double T = T_fin;
                Vec3 suffix{0, 0, 0};  // sum of c_j * alpha_j * T_j over later splats
                for (uint32_t k = examined; k-- > 0;) {
                    const uint32_t sid = buffers.entries[begin + k];
                    const Splat& s = buffers.splats[sid];
                    const double dx = s.mean2d.x - px, dy = s.mean2d.y - py;
                    const double q = s.conic_xx * dx * dx + 2.0 * s.conic_xy * dx * dy +
                                     s.conic_yy * dy * dy;
                    if (q > kSupportQ || q < 0.0) continue;
                    const double G = std::exp(-0.5 * q);
                    const double alpha_raw = s.opacity * G;
                    const double alpha = std::min(kAlphaMax, alpha_raw);
                    T /= 1.0 - alpha;  // transmittance in front of this splat

                    double* a = A + size_t(sid) * 9;
                    double g_alpha = 0.0;
                    for (int c = 0; c < 3; ++c) {
                        a[c] += wgt[c] * alpha * T;
                        g_alpha += wgt[c] * (s.color[c] * T -
                                             (suffix[c] + buffers.background[c] * T_fin) /
                                                 (1.0 - alpha));
                    }
                    suffix += s.color * (alpha * T);
                    if (alpha_raw < kAlphaMax) {
                        const double gG = g_alpha * s.opacity;
                        a[8] += g_alpha * G;  // d alpha / d sigmoid(opacity)
                        const double gq = -0.5 * G * gG;
                        a[3] += gq * 2.0 * (s.conic_xx * dx + s.conic_xy * dy);
                        a[4] += gq * 2.0 * (s.conic_xy * dx + s.conic_yy * dy);
                        a[5] += gq * dx * dx;
                        a[6] += gq * dx * dy;  // full-matrix off-diagonal entry
                        a[7] += gq * dy * dy;
                    }
                }
            }
        }
    });

    for (int c = 1; c < n_chunks; ++c)
        for (size_t i = 0; i < acc[0].size(); ++i) acc[0][i] += acc[c][i];
    const double* A = acc[0].data();

    // Chain per-splat screen gradients back to the cloud parameters.
    const Vec3 cam_center = camera.center();
    for (size_t sid = 0; sid < n_splats; ++sid) {
        const Splat& s = buffers.splats[sid];
        const size_t i = s.source;
        const double* a = A + sid * 9;

        // conic -> cov2d: dL/dC = -K (dL/dK) K with K = conic (both symmetric).
        const double gk00 = a[5], gk01 = a[6], gk11 = a[7];
        const double k00 = s.conic_xx, k01 = s.conic_xy, k11 = s.conic_yy;
        const double t00 = k00 * gk00 + k01 * gk01, t01 = k00 * gk01 + k01 * gk11;
        const double t10 = k01 * gk00 + k11 * gk01, t11 = k01 * gk01 + k11 * gk11;
        ProjectionGrad pg;
        pg.g_cov_xx = -(t00 * k00 + t01 * k01);
        pg.g_cov_xy = -(t00 * k01 + t01 * k11);
        pg.g_cov_yy = -(t10 * k01 + t11 * k11);
        pg.g_mean2d = Vec2{a[3], a[4]};

        const ProjectionDetail d =
            project_detail(cloud.positions[i], cloud.log_scales[i], cloud.rotations[i], camera);
        projection_backward(d, camera, pg, &grads.positions[i], &grads.log_scales[i],
                            &grads.rotations[i]);

        const double sig = s.opacity;
        grads.opacity_logits[i] += a[8] * sig * (1.0 - sig);

        // Color path: SH coefficients plus the view-direction dependence.
        const Vec3 g_color{a[0], a[1], a[2]};
        const int retain = buffers.sh_retain.empty() ? cloud.max_degree : buffers.sh_retain[i];
        const uint8_t* cm = buffers.sh_coeff_mask.empty()
                                ? nullptr
                                : buffers.sh_coeff_mask.data() + i * cloud.sh_stride();
        const Vec3 rel = cloud.positions[i] - cam_center;
        const double r = norm(rel);
        const Vec3 dir = r < 1e-12 ? Vec3{0, 0, 1} : rel / r;
        const ShEval ev = eval_sh_detail(cloud.sh_at(i), cloud.max_degree, dir, retain, cm);
        const int stride = cloud.coeffs_per_channel();
        Vec3 g_dir{0, 0, 0};
        for (int c = 0; c < 3; ++c) {
            if (ev.pre_clamp[c] <= 0.0) continue;  // clamped channel: zero grad
            for (int j = 0; j < ev.active_coeffs; ++j) {
                if (cm && !cm[c * stride + j]) continue;
                grads.sh[i * cloud.sh_stride() + c * stride + j] += g_color[c] * ev.basis[j];
            }
            g_dir += ev.dcolor_ddir[c] * g_color[c];
        }
        if (r >= 1e-12) {
            const Vec3 g_rel = (g_dir - dir * dot(dir, g_dir)) / r;
            grads.positions[i] += g_rel;
        }
    }
    return grads;
}

double render_mae(const GaussianCloud& cloud, const Camera& camera,
                  const std::vector<uint8_t>& mask_a, const std::vector<uint8_t>& mask_b,
                  const RenderOptions& opts) {
    if (mask_a.size() != cloud.size() || mask_b.size() != cloud.size())
        throw InvalidParameterError("render_mae: mask length mismatch");
    const RenderBuffers ra = render_forward(cloud, camera, opts, &mask_a);
    const RenderBuffers rb = render_forward(cloud, camera, opts, &mask_b);
    return mae(ra.image, rb.image);
}

}  // namespace gsdrop
