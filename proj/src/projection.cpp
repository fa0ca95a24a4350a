// SPDX-License-Identifier: Apache-2.0
#include "gsdrop/projection.hpp"

#include <cmath>

#include "gsdrop/errors.hpp"

namespace gsdrop {

Mat3 build_covariance(const Vec3& log_scale, const Vec4& rotation) {
    if (!is_finite(log_scale) || !is_finite(rotation))
        throw InvalidParameterError("build_covariance: non-finite input");
    const double n = norm(rotation);
    if (!(n > 0.0) || !std::isfinite(n))
        throw InvalidParameterError("build_covariance: zero-norm quaternion");
    const Vec4 q{rotation.w / n, rotation.x / n, rotation.y / n, rotation.z / n};
    const Mat3 R = quat_to_rotation(q);
    const Vec3 s{std::exp(log_scale.x), std::exp(log_scale.y), std::exp(log_scale.z)};
    const Mat3 M = R * Mat3::diag(s);
    return M * M.transposed();
}

ProjectionDetail project_detail(const Vec3& position, const Vec3& log_scale,
                                const Vec4& rotation, const Camera& cam) {
    ProjectionDetail d;
    d.q_raw = rotation;
    d.t = cam.to_camera(position);
    d.proj.depth = d.t.z;
    if (d.t.z <= cam.near_clip) {
        d.proj.visible = false;
        return d;
    }

    d.q_norm = norm(rotation);
    d.q_unit = Vec4{rotation.w / d.q_norm, rotation.x / d.q_norm, rotation.y / d.q_norm,
                    rotation.z / d.q_norm};
    d.R = quat_to_rotation(d.q_unit);
    d.scale = Vec3{std::exp(log_scale.x), std::exp(log_scale.y), std::exp(log_scale.z)};
    d.M = d.R * Mat3::diag(d.scale);
    const Mat3 sigma = d.M * d.M.transposed();
    d.V = cam.rotation * sigma * cam.rotation.transposed();

    const double iz = 1.0 / d.t.z;
    const double lim_x = kTanClamp * (0.5 * cam.width / cam.fx);
    const double lim_y = kTanClamp * (0.5 * cam.height / cam.fy);
    double tau_x = d.t.x * iz;
    double tau_y = d.t.y * iz;
    d.clamped_x = tau_x < -lim_x || tau_x > lim_x;
    d.clamped_y = tau_y < -lim_y || tau_y > lim_y;
    tau_x = clamp(tau_x, -lim_x, lim_x);
    tau_y = clamp(tau_y, -lim_y, lim_y);

    d.J00 = cam.fx * iz;
    d.J02 = -cam.fx * tau_x * iz;
    d.J11 = cam.fy * iz;
    d.J12 = -cam.fy * tau_y * iz;

    // cov2d = J V J^T + blur * I with the sparse 2x3 Jacobian above.
    const double r0x = d.J00 * d.V(0, 0) + d.J02 * d.V(2, 0);
    const double r0y = d.J00 * d.V(0, 1) + d.J02 * d.V(2, 1);
    const double r0z = d.J00 * d.V(0, 2) + d.J02 * d.V(2, 2);
    const double r1y = d.J11 * d.V(1, 1) + d.J12 * d.V(2, 1);
    const double r1z = d.J11 * d.V(1, 2) + d.J12 * d.V(2, 2);
    d.proj.cov_xx = r0x * d.J00 + r0z * d.J02 + kCovBlur;
    d.proj.cov_xy = r0y * d.J11 + r0z * d.J12;
    d.proj.cov_yy = r1y * d.J11 + r1z * d.J12 + kCovBlur;

    d.proj.mean2d = Vec2{cam.fx * d.t.x * iz + cam.cx, cam.fy * d.t.y * iz + cam.cy};

    // Cull against the image rectangle expanded by the support radius.
    const double tr = 0.5 * (d.proj.cov_xx + d.proj.cov_yy);
    const double det_part = std::sqrt(std::max(
        0.0, tr * tr - (d.proj.cov_xx * d.proj.cov_yy - d.proj.cov_xy * d.proj.cov_xy)));
    const double lambda_max = tr + det_part;
    const double radius = std::sqrt(kSupportQ * lambda_max);
    const Vec2 m = d.proj.mean2d;
    d.proj.visible = m.x >= -radius && m.x <= cam.width + radius && m.y >= -radius &&
                     m.y <= cam.height + radius;
    return d;
}

Projected2D project(const Vec3& position, const Vec3& log_scale, const Vec4& rotation,
                    const Camera& camera) {
    return project_detail(position, log_scale, rotation, camera).proj;
}

Vec3 unproject(const Vec2& mean2d, double depth, const Camera& camera) {
    return {(mean2d.x - camera.cx) * depth / camera.fx,
            (mean2d.y - camera.cy) * depth / camera.fy, depth};
}

void projection_backward(const ProjectionDetail& d, const Camera& cam, const ProjectionGrad& g,
                         Vec3* g_position, Vec3* g_log_scale, Vec4* g_rotation) {
    if (!d.proj.visible) return;

    // Full-matrix symmetric gradient of cov2d.
    const double ga00 = g.g_cov_xx, ga01 = g.g_cov_xy, ga11 = g.g_cov_yy;

    // gV = J^T GA J (3x3 symmetric), using the sparse J rows
    // j0 = (J00, 0, J02), j1 = (0, J11, J12).
    const Vec3 j0{d.J00, 0.0, d.J02};
    const Vec3 j1{0.0, d.J11, d.J12};
    Mat3 gV;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            gV(a, b) = ga00 * j0[a] * j0[b] + ga01 * (j0[a] * j1[b] + j1[a] * j0[b]) +
                       ga11 * j1[a] * j1[b];

    // gJ = 2 GA J V. Row 0 of (GA J) is ga00*j0 + ga01*j1; row 1 is ga01*j0 + ga11*j1.
    const Vec3 gaj0 = j0 * ga00 + j1 * ga01;
    const Vec3 gaj1 = j0 * ga01 + j1 * ga11;
    const Vec3 gJ_row0 = d.V * gaj0 * 2.0;  // V symmetric
    const Vec3 gJ_row1 = d.V * gaj1 * 2.0;
    const double gJ00 = gJ_row0.x, gJ02 = gJ_row0.z;
    const double gJ11 = gJ_row1.y, gJ12 = gJ_row1.z;

    // Chain to camera-space position t.
    const double iz = 1.0 / d.t.z;
    const double iz2 = iz * iz;
    const double tau_x = -d.J02 / cam.fx / iz;  // clamped tangent values
    const double tau_y = -d.J12 / cam.fy / iz;
    Vec3 gt{0, 0, 0};

    // mean2d = (fx*tx*iz + cx, fy*ty*iz + cy)
    gt.x += g.g_mean2d.x * cam.fx * iz;
    gt.y += g.g_mean2d.y * cam.fy * iz;
    gt.z += -g.g_mean2d.x * cam.fx * d.t.x * iz2 - g.g_mean2d.y * cam.fy * d.t.y * iz2;

    // J00 = fx*iz, J02 = -fx*tau_x*iz (tau clamp zeroes the x-path when active)
    gt.z += -gJ00 * cam.fx * iz2;
    gt.z += -gJ11 * cam.fy * iz2;
    const double ax = d.clamped_x ? 0.0 : 1.0;
    const double ay = d.clamped_y ? 0.0 : 1.0;
    gt.x += -gJ02 * cam.fx * iz * (ax * iz);
    gt.z += gJ02 * cam.fx * iz2 * tau_x * (ax + 1.0);
    gt.y += -gJ12 * cam.fy * iz * (ay * iz);
    gt.z += gJ12 * cam.fy * iz2 * tau_y * (ay + 1.0);

    *g_position += cam.rotation.transposed_mul(gt);

    // gSigma = Rwc^T gV Rwc, then through Sigma = M M^T.
    const Mat3 gSigma = cam.rotation.transposed() * gV * cam.rotation;
    const Mat3 gM = gSigma * d.M * 2.0;

    // M = R * diag(scale): column b of M is column b of R times scale_b.
    Mat3 gR;
    Vec3 gs{0, 0, 0};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            gR(a, b) = gM(a, b) * d.scale[b];
            gs[b] += gM(a, b) * d.R(a, b) * d.scale[b];  // dscale_b/dlog_scale_b = scale_b
        }
    }
    *g_log_scale += gs;

    // R through the unit quaternion, then through normalization.
    const double w = d.q_unit.w, x = d.q_unit.x, y = d.q_unit.y, z = d.q_unit.z;
    const Mat3 dRdw{{0, -2 * z, 2 * y, 2 * z, 0, -2 * x, -2 * y, 2 * x, 0}};
    const Mat3 dRdx{{0, 2 * y, 2 * z, 2 * y, -4 * x, -2 * w, 2 * z, 2 * w, -4 * x}};
    const Mat3 dRdy{{-4 * y, 2 * x, 2 * w, 2 * x, 0, 2 * z, -2 * w, 2 * z, -4 * y}};
    const Mat3 dRdz{{-4 * z, -2 * w, 2 * x, 2 * w, -4 * z, 2 * y, 2 * x, 2 * y, 0}};
    auto frob = [](const Mat3& a, const Mat3& b) {
        double s = 0.0;
        for (int i = 0; i < 9; ++i) s += a.m[i] * b.m[i];
        return s;
    };
    const Vec4 g_qunit{frob(gR, dRdw), frob(gR, dRdx), frob(gR, dRdy), frob(gR, dRdz)};

    // q_unit = q_raw / |q_raw|: g_qraw = (I - qu qu^T) g_qunit / |q_raw|
    const double proj_coef = dot(d.q_unit, g_qunit);
    for (int k = 0; k < 4; ++k)
        (*g_rotation)[k] += (g_qunit[k] - d.q_unit[k] * proj_coef) / d.q_norm;
}

}  // namespace gsdrop
