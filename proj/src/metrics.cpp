// SPDX-License-Identifier: Apache-2.0
#include "gsdrop/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace gsdrop {

namespace {

std::array<double, kSsimWindow> ssim_kernel() {
    std::array<double, kSsimWindow> k{};
    const int half = kSsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - half;
        k[i] = std::exp(-0.5 * d * d / (kSsimSigma * kSsimSigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Separable same-size blur with zero padding; self-adjoint for this kernel.
void blur_same(const std::vector<double>& in, int w, int h, std::vector<double>& tmp,
               std::vector<double>& out) {
    static const std::array<double, kSsimWindow> k = ssim_kernel();
    const int half = kSsimWindow / 2;
    tmp.assign(in.size(), 0.0);
    out.assign(in.size(), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            const int lo = std::max(0, x - half), hi = std::min(w - 1, x + half);
            for (int xx = lo; xx <= hi; ++xx) s += k[xx - x + half] * in[size_t(y) * w + xx];
            tmp[size_t(y) * w + x] = s;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            const int lo = std::max(0, y - half), hi = std::min(h - 1, y + half);
            for (int yy = lo; yy <= hi; ++yy) s += k[yy - y + half] * tmp[size_t(yy) * w + x];
            out[size_t(y) * w + x] = s;
        }
    }
}

void extract_channel(const Image& img, int c, std::vector<double>& out) {
    out.resize(img.pixel_count());
    for (size_t p = 0; p < img.pixel_count(); ++p) out[p] = img.data[p * 3 + c];
}

double ssim_impl(const Image& a, const Image& b, Image* grad_a) {
    require_same_shape(a, b, "ssim");
    if (a.width < kSsimWindow || a.height < kSsimWindow)
        throw InvalidParameterError("ssim: image smaller than the 11x11 window");

    const int w = a.width, h = a.height;
    const size_t np = a.pixel_count();
    std::vector<double> xa, xb, mu_x, mu_y, sxx, syy, sxy, tmp, buf;
    std::vector<double> g_mu(np), g_sxx(np), g_sxy(np), blur1, blur2, blur3;
    if (grad_a) *grad_a = Image(w, h, 0.0);

    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        extract_channel(a, c, xa);
        extract_channel(b, c, xb);
        blur_same(xa, w, h, tmp, mu_x);
        blur_same(xb, w, h, tmp, mu_y);
        buf.resize(np);
        for (size_t p = 0; p < np; ++p) buf[p] = xa[p] * xa[p];
        blur_same(buf, w, h, tmp, sxx);
        for (size_t p = 0; p < np; ++p) buf[p] = xb[p] * xb[p];
        blur_same(buf, w, h, tmp, syy);
        for (size_t p = 0; p < np; ++p) buf[p] = xa[p] * xb[p];
        blur_same(buf, w, h, tmp, sxy);

        for (size_t p = 0; p < np; ++p) {
            const double mx = mu_x[p], my = mu_y[p];
            const double vx = sxx[p] - mx * mx;
            const double vy = syy[p] - my * my;
            const double vxy = sxy[p] - mx * my;
            const double a1 = 2.0 * mx * my + kSsimC1;
            const double a2 = 2.0 * vxy + kSsimC2;
            const double b1 = mx * mx + my * my + kSsimC1;
            const double b2 = vx + vy + kSsimC2;
            const double denom = b1 * b2;
            const double s = a1 * a2 / denom;
            total += s;
            if (grad_a) {
                // d s / d(mu_x, Sxx, Sxy) with Sxx = blur(a^2), Sxy = blur(a*b)
                g_mu[p] = 2.0 * my * (a2 - a1) / denom + 2.0 * mx * s * (1.0 / b2 - 1.0 / b1);
                g_sxx[p] = -s / b2;
                g_sxy[p] = 2.0 * a1 / denom;
            }
        }
        if (grad_a) {
            blur_same(g_mu, w, h, tmp, blur1);
            blur_same(g_sxx, w, h, tmp, blur2);
            blur_same(g_sxy, w, h, tmp, blur3);
            const double scale = 1.0 / (3.0 * double(np));
            for (size_t p = 0; p < np; ++p)
                grad_a->data[p * 3 + c] =
                    (blur1[p] + 2.0 * xa[p] * blur2[p] + xb[p] * blur3[p]) * scale;
        }
    }
    return total / (3.0 * double(np));
}

}  // namespace

double psnr(const Image& a, const Image& b) {
    require_same_shape(a, b, "psnr");
    double mse = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double da = clamp(a.data[i], 0.0, 1.0) - clamp(b.data[i], 0.0, 1.0);
        mse += da * da;
    }
    mse /= double(a.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) { return ssim_impl(a, b, nullptr); }

double ssim_with_grad(const Image& a, const Image& b, Image* grad_a) {
    return ssim_impl(a, b, grad_a);
}

double mae(const Image& a, const Image& b) {
    require_same_shape(a, b, "mae");
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) s += std::abs(a.data[i] - b.data[i]);
    return s / double(a.data.size());
}

}  // namespace gsdrop
