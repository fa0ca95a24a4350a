// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "gsdrop/errors.hpp"
#include "gsdrop/vecmath.hpp"

namespace gsdrop {

/// Row-major H x W x 3 float image, channel-interleaved, values nominally in
/// [0,1] (renders may exceed 1 slightly before tone mapping).
struct Image {
    int width = 0, height = 0;
    std::vector<double> data;  // size height * width * 3

    Image() = default;
    Image(int w, int h, double fill = 0.0) : width(w), height(h), data(size_t(w) * h * 3, fill) {}

    size_t pixel_count() const { return size_t(width) * height; }
    size_t element_count() const { return data.size(); }

    double& at(int x, int y, int c) { return data[(size_t(y) * width + x) * 3 + c]; }
    double at(int x, int y, int c) const { return data[(size_t(y) * width + x) * 3 + c]; }

    Vec3 pixel(int x, int y) const {
        const size_t i = (size_t(y) * width + x) * 3;
        return {data[i], data[i + 1], data[i + 2]};
    }

    void set_pixel(int x, int y, const Vec3& v) {
        const size_t i = (size_t(y) * width + x) * 3;
        data[i] = v.x;
        data[i + 1] = v.y;
        data[i + 2] = v.z;
    }

    bool same_shape(const Image& o) const { return width == o.width && height == o.height; }
};

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b)) throw InvalidParameterError(std::string(what) + ": image shape mismatch");
}

}  // namespace gsdrop
