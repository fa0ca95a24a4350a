// SPDX-License-Identifier: Apache-2.0
#include "gsdrop/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gsdrop/errors.hpp"

namespace gsdrop {

namespace {

inline double dist2(const Vec3& a, const Vec3& b) {
    const Vec3 d = a - b;
    return dot(d, d);
}

struct Candidate {
    double d2;
    uint32_t index;
    // Heap keeps the worst candidate on top under this order.
    bool operator<(const Candidate& o) const {
        if (d2 != o.d2) return d2 < o.d2;
        return index < o.index;
    }
};

}  // namespace

KnnIndex::KnnIndex(const std::vector<Vec3>& positions, int leaf_size) : points_(positions) {
    if (points_.empty()) throw InvalidParameterError("KnnIndex: empty input");
    for (const Vec3& p : points_)
        if (!is_finite(p)) throw InvalidParameterError("KnnIndex: non-finite coordinate");
    order_.resize(points_.size());
    for (size_t i = 0; i < points_.size(); ++i) order_[i] = static_cast<uint32_t>(i);
    nodes_.reserve(2 * points_.size() / std::max(1, leaf_size) + 8);
    root_ = build(0, static_cast<uint32_t>(points_.size()), std::max(1, leaf_size));
}

int32_t KnnIndex::build(uint32_t begin, uint32_t end, int leaf_size) {
    const int32_t id = static_cast<int32_t>(nodes_.size());
    nodes_.push_back(Node{});
    if (end - begin <= static_cast<uint32_t>(leaf_size)) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }
    // Split the widest dimension at the median.
    Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
    Vec3 hi{-std::numeric_limits<double>::max(), -std::numeric_limits<double>::max(),
            -std::numeric_limits<double>::max()};
    for (uint32_t i = begin; i < end; ++i) {
        const Vec3& p = points_[order_[i]];
        for (int d = 0; d < 3; ++d) {
            lo[d] = std::min(lo[d], p[d]);
            hi[d] = std::max(hi[d], p[d]);
        }
    }
    int dim = 0;
    for (int d = 1; d < 3; ++d)
        if (hi[d] - lo[d] > hi[dim] - lo[dim]) dim = d;
    if (hi[dim] - lo[dim] == 0.0) {  // all points coincide: keep as a leaf
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }
    const uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](uint32_t a, uint32_t b) {
                         const double pa = points_[a][dim], pb = points_[b][dim];
                         if (pa != pb) return pa < pb;
                         return a < b;
                     });
    Node n;
    n.dim = dim;
    n.split = points_[order_[mid]][dim];
    const int32_t left = build(begin, mid, leaf_size);
    const int32_t right = build(mid, end, leaf_size);
    n.left = left;
    n.right = right;
    nodes_[id] = n;
    return id;
}

std::vector<uint32_t> KnnIndex::query_point(const Vec3& p, size_t k) const {
    if (k > points_.size()) throw InvalidParameterError("KnnIndex: k exceeds point count");
    if (k == 0) return {};

    std::vector<Candidate> heap;
    heap.reserve(k + 1);

    auto consider = [&](uint32_t idx) {
        const Candidate c{dist2(p, points_[idx]), idx};
        if (heap.size() < k) {
            heap.push_back(c);
            std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = c;
            std::push_heap(heap.begin(), heap.end());
        }
    };

    // Recursive traversal, nearer child first; a subtree is skipped only when
    // its minimal distance strictly exceeds the current worst candidate, so
    // exact ties are always explored and resolved by index.
    auto walk = [&](auto&& self, int32_t node_id) -> void {
        const Node& n = nodes_[node_id];
        if (n.dim < 0) {
            for (uint32_t i = n.begin; i < n.end; ++i) consider(order_[i]);
            return;
        }
        const double delta = p[n.dim] - n.split;
        const int32_t near = delta < 0.0 ? n.left : n.right;
        const int32_t far = delta < 0.0 ? n.right : n.left;
        self(self, near);
        if (heap.size() < k || delta * delta <= heap.front().d2) self(self, far);
    };
    walk(walk, root_);

    std::sort(heap.begin(), heap.end());
    std::vector<uint32_t> out(heap.size());
    for (size_t i = 0; i < heap.size(); ++i) out[i] = heap[i].index;
    return out;
}

std::vector<uint32_t> KnnIndex::query_index(size_t index, size_t k) const {
    if (index >= points_.size()) throw InvalidParameterError("KnnIndex: index out of range");
    if (k >= points_.size())
        throw InvalidParameterError("KnnIndex: k must be below the point count");
    // Query k+1 and drop the query point itself. At most one of the k+1
    // results can be `index`, so k survivors always remain.
    const std::vector<uint32_t> got = query_point(points_[index], k + 1);
    std::vector<uint32_t> out;
    out.reserve(k);
    for (uint32_t idx : got) {
        if (idx == index) continue;
        if (out.size() < k) out.push_back(idx);
    }
    return out;
}

std::vector<uint32_t> KnnIndex::radius_query(const Vec3& p, double radius) const {
    std::vector<uint32_t> out;
    if (!(radius > 0.0)) return out;
    const double r2 = radius * radius;
    auto walk = [&](auto&& self, int32_t node_id) -> void {
        const Node& n = nodes_[node_id];
        if (n.dim < 0) {
            for (uint32_t i = n.begin; i < n.end; ++i)
                if (dist2(p, points_[order_[i]]) < r2) out.push_back(order_[i]);
            return;
        }
        const double delta = p[n.dim] - n.split;
        const int32_t near = delta < 0.0 ? n.left : n.right;
        const int32_t far = delta < 0.0 ? n.right : n.left;
        self(self, near);
        if (delta * delta < r2) self(self, far);
    };
    walk(walk, root_);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace gsdrop
