// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "gsdrop/vecmath.hpp"

namespace gsdrop {

/// Pinhole camera: rigid world-to-camera transform plus intrinsics.
/// Camera space looks down +z; a point is in front of the camera when
/// its camera-space z exceeds near_clip.
struct Camera {
    Mat3 rotation;  // world-to-camera rotation block
    Vec3 translation;
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;
    double near_clip = 0.01;

    Vec3 to_camera(const Vec3& p_world) const { return rotation * p_world + translation; }

    /// Camera center in world coordinates: -R^T t.
    Vec3 center() const { return -rotation.transposed_mul(translation); }

    /// Throws InvalidParameterError when the rotation block is not orthonormal
    /// within 1e-6, focals are non-positive, or near_clip <= 0.
    void validate() const;
};

/// Camera at `eye` looking toward `target` with the given up hint.
Camera make_lookat_camera(const Vec3& eye, const Vec3& target, const Vec3& up,
                          double focal, int width, int height);

}  // namespace gsdrop
