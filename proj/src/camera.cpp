// SPDX-License-Identifier: Apache-2.0
#include "gsdrop/camera.hpp"

#include <cmath>

#include "gsdrop/errors.hpp"

namespace gsdrop {

void Camera::validate() const {
    // R R^T must be the identity within 1e-6 entrywise.
    const Mat3 rrt = rotation * rotation.transposed();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            const double expect = (r == c) ? 1.0 : 0.0;
            if (!std::isfinite(rrt(r, c)) || std::abs(rrt(r, c) - expect) > 1e-6)
                throw InvalidParameterError("Camera: rotation block is not orthonormal");
        }
    }
    if (!(fx > 0.0) || !(fy > 0.0))
        throw InvalidParameterError("Camera: focal lengths must be positive");
    if (!(near_clip > 0.0)) throw InvalidParameterError("Camera: near_clip must be positive");
    if (width <= 0 || height <= 0)
        throw InvalidParameterError("Camera: resolution must be positive");
}

Camera make_lookat_camera(const Vec3& eye, const Vec3& target, const Vec3& up, double focal,
                          int width, int height) {
    const Vec3 forward = normalized(target - eye);  // camera +z
    Vec3 right = cross(forward, up);
    const double rn = norm(right);
    if (rn < 1e-12) {
        // up parallel to view direction; pick an arbitrary orthogonal axis
        right = cross(forward, Vec3{1, 0, 0});
        if (norm(right) < 1e-12) right = cross(forward, Vec3{0, 1, 0});
    }
    right = normalized(right);
    const Vec3 down = cross(forward, right);  // camera +y points down the image

    Camera cam;
    for (int c = 0; c < 3; ++c) {
        cam.rotation(0, c) = right[c];
        cam.rotation(1, c) = down[c];
        cam.rotation(2, c) = forward[c];
    }
    cam.translation = -(cam.rotation * eye);
    cam.fx = cam.fy = focal;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    cam.width = width;
    cam.height = height;
    return cam;
}

}  // namespace gsdrop
