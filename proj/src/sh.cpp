// SPDX-License-Identifier: Apache-2.0
#include "gsdrop/sh.hpp"

#include <cmath>
#include <cstring>

#include "gsdrop/errors.hpp"

namespace gsdrop {

namespace {

constexpr double C2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                          -1.0925484305920792, 0.5462742152960396};
constexpr double C3[7] = {-0.5900435899266435, 2.890611442640554,  -0.4570457994644658,
                          0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                          -0.5900435899266435};

}  // namespace

void sh_basis(const Vec3& dir, int degree, double* out) {
    const double x = dir.x, y = dir.y, z = dir.z;
    out[0] = kSH_C0;
    if (degree < 1) return;
    out[1] = -kSH_C1 * y;
    out[2] = kSH_C1 * z;
    out[3] = -kSH_C1 * x;
    if (degree < 2) return;
    const double xx = x * x, yy = y * y, zz = z * z;
    out[4] = C2[0] * x * y;
    out[5] = C2[1] * y * z;
    out[6] = C2[2] * (2.0 * zz - xx - yy);
    out[7] = C2[3] * x * z;
    out[8] = C2[4] * (xx - yy);
    if (degree < 3) return;
    out[9] = C3[0] * y * (3.0 * xx - yy);
    out[10] = C3[1] * x * y * z;
    out[11] = C3[2] * y * (4.0 * zz - xx - yy);
    out[12] = C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
    out[13] = C3[4] * x * (4.0 * zz - xx - yy);
    out[14] = C3[5] * z * (xx - yy);
    out[15] = C3[6] * x * (xx - 3.0 * yy);
}

void sh_basis_with_grad(const Vec3& dir, int degree, double* out, Vec3* g) {
    sh_basis(dir, degree, out);
    const double x = dir.x, y = dir.y, z = dir.z;
    g[0] = {0, 0, 0};
    if (degree < 1) return;
    g[1] = {0, -kSH_C1, 0};
    g[2] = {0, 0, kSH_C1};
    g[3] = {-kSH_C1, 0, 0};
    if (degree < 2) return;
    const double xx = x * x, yy = y * y, zz = z * z;
    g[4] = Vec3{y, x, 0} * C2[0];
    g[5] = Vec3{0, z, y} * C2[1];
    g[6] = Vec3{-2.0 * x, -2.0 * y, 4.0 * z} * C2[2];
    g[7] = Vec3{z, 0, x} * C2[3];
    g[8] = Vec3{2.0 * x, -2.0 * y, 0} * C2[4];
    if (degree < 3) return;
    g[9] = Vec3{6.0 * x * y, 3.0 * xx - 3.0 * yy, 0} * C3[0];
    g[10] = Vec3{y * z, x * z, x * y} * C3[1];
    g[11] = Vec3{-2.0 * x * y, 4.0 * zz - xx - 3.0 * yy, 8.0 * y * z} * C3[2];
    g[12] = Vec3{-6.0 * x * z, -6.0 * y * z, 6.0 * zz - 3.0 * xx - 3.0 * yy} * C3[3];
    g[13] = Vec3{4.0 * zz - 3.0 * xx - yy, -2.0 * x * y, 8.0 * x * z} * C3[4];
    g[14] = Vec3{2.0 * x * z, -2.0 * y * z, xx - yy} * C3[5];
    g[15] = Vec3{3.0 * xx - 3.0 * yy, -6.0 * x * y, 0} * C3[6];
}

Vec3 eval_sh(const double* sh, int max_degree, const Vec3& view_dir, int retain_degree) {
    if (retain_degree < 0 || retain_degree > max_degree)
        throw InvalidParameterError("eval_sh: retain_degree out of [0, L]");
    if (std::abs(norm(view_dir) - 1.0) > 1e-6)
        throw InvalidParameterError("eval_sh: view_dir must be unit norm");
    return eval_sh_detail(sh, max_degree, view_dir, retain_degree, nullptr).color;
}

ShEval eval_sh_detail(const double* sh, int max_degree, const Vec3& dir, int retain_degree,
                      const uint8_t* coeff_mask) {
    ShEval ev;
    std::memset(ev.basis, 0, sizeof(ev.basis));
    ev.active_coeffs = sh_coeff_count(retain_degree);
    Vec3 basis_grad[16];
    sh_basis_with_grad(dir, retain_degree, ev.basis, basis_grad);

    const int stride = sh_coeff_count(max_degree);
    for (int ch = 0; ch < 3; ++ch) {
        const double* c = sh + ch * stride;
        const uint8_t* m = coeff_mask ? coeff_mask + ch * stride : nullptr;
        double sum = 0.5;
        Vec3 dsum{0, 0, 0};
        for (int j = 0; j < ev.active_coeffs; ++j) {
            if (m && !m[j]) continue;
            sum += c[j] * ev.basis[j];
            dsum += basis_grad[j] * c[j];
        }
        ev.pre_clamp[ch] = sum;
        ev.color[ch] = sum > 0.0 ? sum : 0.0;
        ev.dcolor_ddir[ch] = dsum;
    }
    return ev;
}

}  // namespace gsdrop
