// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "gsdrop/vecmath.hpp"

namespace gsdrop {

/// kd-tree over 3D positions with exact k-nearest-neighbor and radius
/// queries. Results match a brute-force distance sort, with ties broken by
/// ascending index. Queries are read-only and thread-safe.
class KnnIndex {
public:
    explicit KnnIndex(const std::vector<Vec3>& positions, int leaf_size = 16);

    size_t size() const { return points_.size(); }

    /// k nearest neighbors of an arbitrary point (may include any index).
    /// Sorted by (distance, index). Throws when k > N.
    std::vector<uint32_t> query_point(const Vec3& p, size_t k) const;

    /// k nearest neighbors of the stored point `index`, excluding itself.
    /// Throws InvalidParameterError when k >= N.
    std::vector<uint32_t> query_index(size_t index, size_t k) const;

    /// All indices with distance(p_i, p) < radius, ascending index order.
    std::vector<uint32_t> radius_query(const Vec3& p, double radius) const;

private:
    struct Node {
        int dim = -1;        // -1 marks a leaf
        double split = 0.0;
        uint32_t begin = 0, end = 0;  // leaf range into order_
        int32_t left = -1, right = -1;
    };

    int32_t build(uint32_t begin, uint32_t end, int leaf_size);

    std::vector<Vec3> points_;
    std::vector<uint32_t> order_;
    std::vector<Node> nodes_;
    int32_t root_ = -1;
};

}  // namespace gsdrop
