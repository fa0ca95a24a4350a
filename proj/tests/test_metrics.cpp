// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>

#include "gsdrop/metrics.hpp"
#include "gsdrop/rng.hpp"

using namespace gsdrop;

namespace {

Image random_image(Rng& rng, int w, int h, double lo = 0.0, double hi = 1.0) {
    Image img(w, h);
    for (double& v : img.data) v = rng.uniform(lo, hi);
    return img;
}

/// Direct sliding-window SSIM reference: per-pixel 11x11 window sums with the
/// same zero padding, no separable filtering.
double ssim_reference(const Image& a, const Image& b) {
    const int w = a.width, h = a.height, half = kSsimWindow / 2;
    std::vector<double> kernel(kSsimWindow);
    double ksum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - half;
        kernel[i] = std::exp(-0.5 * d * d / (kSsimSigma * kSsimSigma));
        ksum += kernel[i];
    }
    for (double& v : kernel) v /= ksum;

    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
                for (int dy = -half; dy <= half; ++dy) {
                    for (int dx = -half; dx <= half; ++dx) {
                        const int xx = x + dx, yy = y + dy;
                        if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
                        const double wgt = kernel[dx + half] * kernel[dy + half];
                        const double va = a.at(xx, yy, c), vb = b.at(xx, yy, c);
                        mx += wgt * va;
                        my += wgt * vb;
                        sxx += wgt * va * va;
                        syy += wgt * vb * vb;
                        sxy += wgt * va * vb;
                    }
                }
                const double vx = sxx - mx * mx, vy = syy - my * my, vxy = sxy - mx * my;
                total += (2 * mx * my + kSsimC1) * (2 * vxy + kSsimC2) /
                         ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
            }
        }
    }
    return total / (3.0 * w * h);
}

}  // namespace

TEST_CASE("psnr examples") {
    Image a(16, 16, 0.5), b(16, 16, 0.5);
    CHECK(psnr(a, b) == std::numeric_limits<double>::infinity());
    Image zero(16, 16, 0.0), one(16, 16, 1.0);
    CHECK(psnr(zero, one) == doctest::Approx(0.0));
    Image offset(16, 16, 0.6);
    CHECK(psnr(a, offset) == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("psnr symmetric and monotone under noise") {
    Rng rng(21);
    Image base = random_image(rng, 16, 16, 0.2, 0.8);
    double prev = std::numeric_limits<double>::infinity();
    for (double amp : {0.01, 0.03, 0.06, 0.1, 0.2}) {
        Image noisy = base;
        Rng nrng(5);
        for (double& v : noisy.data) v += nrng.uniform(-amp, amp);
        const double p = psnr(base, noisy);
        CHECK(p == doctest::Approx(psnr(noisy, base)));
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("ssim identical and constant images give 1") {
    Rng rng(2);
    Image a = random_image(rng, 16, 12);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    Image c1(16, 16, 0.3), c2(16, 16, 0.3);
    CHECK(ssim(c1, c2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim matches the sliding-window reference") {
    Rng rng(33);
    Image a = random_image(rng, 14, 17, 0.1, 0.9);
    Image b(14, 17);
    for (size_t i = 0; i < a.data.size(); ++i) b.data[i] = 1.0 - a.data[i];  // inverted pattern
    const double got = ssim(a, b);
    CHECK(got < 1.0);
    CHECK(got == doctest::Approx(ssim_reference(a, b)).epsilon(1e-6));
    // And on an uncorrelated pair.
    Image c = random_image(rng, 14, 17);
    CHECK(ssim(a, c) == doctest::Approx(ssim_reference(a, c)).epsilon(1e-6));
    CHECK(ssim(a, c) == doctest::Approx(ssim(c, a)).epsilon(1e-12));
}

TEST_CASE("ssim rejects images under the window size") {
    Image a(8, 8, 0.1), b(8, 8, 0.2);
    CHECK_THROWS_AS(ssim(a, b), InvalidParameterError);
    Image c(16, 10, 0.1), d(16, 10, 0.2);
    CHECK_THROWS_AS(ssim(c, d), InvalidParameterError);
}

TEST_CASE("ssim gradient matches finite differences") {
    Rng rng(44);
    Image a = random_image(rng, 12, 13, 0.2, 0.8);
    Image b = random_image(rng, 12, 13, 0.2, 0.8);
    Image grad;
    ssim_with_grad(a, b, &grad);
    const double h = 1e-5;
    for (int probe = 0; probe < 5; ++probe) {
        const size_t idx = rng.uniform_index(a.data.size());
        Image up = a, dn = a;
        up.data[idx] += h;
        dn.data[idx] -= h;
        const double fd = (ssim(up, b) - ssim(dn, b)) / (2 * h);
        CHECK(grad.data[idx] ==
              doctest::Approx(fd).epsilon(1e-3).scale(std::max(1e-4, std::abs(fd))));
    }
}

TEST_CASE("mae examples and summation oracle") {
    Image a(16, 16, 0.5), b(16, 16, 0.75);
    CHECK(mae(a, a) == 0.0);
    CHECK(mae(a, b) == doctest::Approx(0.25));
    Rng rng(55);
    Image x = random_image(rng, 9, 7), y = random_image(rng, 9, 7);
    double direct = 0.0;
    for (size_t i = 0; i < x.data.size(); ++i) direct += std::abs(x.data[i] - y.data[i]);
    direct /= double(x.data.size());
    CHECK(mae(x, y) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(mae(x, y) == doctest::Approx(mae(y, x)).epsilon(1e-15));
}

TEST_CASE("metric shape mismatch errors") {
    Image a(8, 8), b(9, 8);
    CHECK_THROWS_AS(psnr(a, b), InvalidParameterError);
    CHECK_THROWS_AS(mae(a, b), InvalidParameterError);
}
