// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gsdrop/dropout.hpp"
#include "gsdrop/kdtree.hpp"
#include "gsdrop/spatial_stats.hpp"
#include "oracle.hpp"

using namespace gsdrop;

namespace {

std::vector<Vec3> random_points(Rng& rng, size_t n, double extent = 1.0) {
    std::vector<Vec3> pts(n);
    for (Vec3& p : pts)
        p = {rng.uniform(-extent, extent), rng.uniform(-extent, extent),
             rng.uniform(-extent, extent)};
    return pts;
}

/// O(N^2) distance-sort reference with (distance, index) tie-breaking.
std::vector<uint32_t> brute_knn(const std::vector<Vec3>& pts, size_t query, size_t k) {
    std::vector<std::pair<double, uint32_t>> d;
    for (size_t j = 0; j < pts.size(); ++j) {
        if (j == query) continue;
        const Vec3 diff = pts[j] - pts[query];
        d.emplace_back(dot(diff, diff), static_cast<uint32_t>(j));
    }
    std::sort(d.begin(), d.end());
    std::vector<uint32_t> out;
    for (size_t i = 0; i < k && i < d.size(); ++i) out.push_back(d[i].second);
    return out;
}

/// Direct double-sum Moran's I.
double brute_moran(const std::vector<Vec3>& pts, const std::vector<double>& attr, double lo,
                   double hi) {
    const size_t n = pts.size();
    double mean = 0.0;
    for (double v : attr) mean += v;
    mean /= double(n);
    double num = 0.0, denom = 0.0;
    int64_t w = 0;
    for (size_t i = 0; i < n; ++i) {
        denom += (attr[i] - mean) * (attr[i] - mean);
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = norm(pts[i] - pts[j]);
            if (d >= lo && d < hi) {
                num += (attr[i] - mean) * (attr[j] - mean);
                ++w;
            }
        }
    }
    return (double(n) / double(w)) * num / denom;
}

}  // namespace

TEST_CASE("knn three points on a line") {
    std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {3, 0, 0}};
    KnnIndex index(pts);
    const auto nn = index.query_index(1, 1);
    REQUIRE(nn.size() == 1);
    CHECK(nn[0] == 0);
}

TEST_CASE("knn preconditions") {
    std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}};
    KnnIndex index(pts);
    CHECK_THROWS_AS(index.query_index(0, 2), InvalidParameterError);
    CHECK_THROWS_AS(KnnIndex(std::vector<Vec3>{}), InvalidParameterError);
}

TEST_CASE("knn matches the brute-force oracle") {
    Rng rng(42);
    const std::vector<Vec3> pts = random_points(rng, 500);
    KnnIndex index(pts);
    for (int q = 0; q < 50; ++q) {
        const size_t query = rng.uniform_index(pts.size());
        const auto got = index.query_index(query, 10);
        const auto want = brute_knn(pts, query, 10);
        REQUIRE(got.size() == want.size());
        for (size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
    }
}

TEST_CASE("knn handles duplicate points with index ties") {
    std::vector<Vec3> pts{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 0, 0}, {0, 0, 0}};
    KnnIndex index(pts);
    const auto got = index.query_index(2, 3);
    const auto want = brute_knn(pts, 2, 3);
    REQUIRE(got.size() == 3);
    for (size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
}

TEST_CASE("radius query matches direct scan") {
    Rng rng(7);
    const std::vector<Vec3> pts = random_points(rng, 300);
    KnnIndex index(pts);
    for (int q = 0; q < 20; ++q) {
        const Vec3 p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double r = rng.uniform(0.1, 1.0);
        const auto got = index.radius_query(p, r);
        std::vector<uint32_t> want;
        for (size_t j = 0; j < pts.size(); ++j)
            if (norm(pts[j] - p) < r) want.push_back(static_cast<uint32_t>(j));
        REQUIRE(got.size() == want.size());
        for (size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
    }
}

TEST_CASE("moran constant attribute raises degenerate-input") {
    Rng rng(1);
    const std::vector<Vec3> pts = random_points(rng, 20);
    const std::vector<double> attr(20, 3.0);
    CHECK_THROWS_AS(morans_i(pts, attr, 0.1, 1.0), DegenerateInputError);
}

TEST_CASE("moran empty bin raises") {
    std::vector<Vec3> pts{{0, 0, 0}, {10, 0, 0}, {20, 0, 0}};
    std::vector<double> attr{0, 1, 2};
    CHECK_THROWS_AS(morans_i(pts, attr, 0.1, 0.2), EmptyBinError);
}

TEST_CASE("moran alternating chain equals -1") {
    // Unit-spaced 1D chain of +-1 with the adjacent-pair band.
    const int n = 100;
    std::vector<Vec3> pts(n);
    std::vector<double> attr(n);
    for (int i = 0; i < n; ++i) {
        pts[i] = {double(i), 0, 0};
        attr[i] = (i % 2 == 0) ? 1.0 : -1.0;
    }
    const double got = morans_i(pts, attr, 0.5, 1.5);
    CHECK(got == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(got == doctest::Approx(brute_moran(pts, attr, 0.5, 1.5)).epsilon(1e-12));
}

TEST_CASE("moran positive for a smooth field") {
    Rng rng(9);
    const std::vector<Vec3> pts = random_points(rng, 200);
    std::vector<double> attr(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) attr[i] = pts[i].x;
    CHECK(morans_i(pts, attr, 1e-3, 0.3) > 0.0);
}

TEST_CASE("moran matches the direct double-sum oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        const size_t n = 50 + rng.uniform_index(250);
        const std::vector<Vec3> pts = random_points(rng, n);
        std::vector<double> attr(n);
        for (double& v : attr) v = rng.uniform(0, 1);
        const double lo = rng.uniform(0.0, 0.3), hi = lo + rng.uniform(0.3, 1.0);
        CHECK(morans_i(pts, attr, lo, hi) ==
              doctest::Approx(brute_moran(pts, attr, lo, hi)).epsilon(1e-9));
    }
}

TEST_CASE("moran invariant to affine attribute rescale and rigid motion") {
    Rng rng(23);
    const std::vector<Vec3> pts = random_points(rng, 150);
    std::vector<double> attr(pts.size());
    for (double& v : attr) v = rng.uniform(0, 1);
    const double base = morans_i(pts, attr, 0.05, 0.8);

    std::vector<double> scaled(attr.size());
    for (size_t i = 0; i < attr.size(); ++i) scaled[i] = -2.5 * attr[i] + 7.0;
    CHECK(morans_i(pts, scaled, 0.05, 0.8) == doctest::Approx(base).epsilon(1e-10));

    // Rigid transform: rotation about z plus a translation.
    const double c = std::cos(0.7), s = std::sin(0.7);
    std::vector<Vec3> moved(pts.size());
    for (size_t i = 0; i < pts.size(); ++i)
        moved[i] = {c * pts[i].x - s * pts[i].y + 3.0, s * pts[i].x + c * pts[i].y - 1.0,
                    pts[i].z + 0.5};
    CHECK(morans_i(moved, attr, 0.05, 0.8) == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("log bin edges and profile schema") {
    const auto edges = log_bin_edges(1e-3, 0.5, 8);
    REQUIRE(edges.size() == 9);
    CHECK(edges.front() == doctest::Approx(1e-3));
    CHECK(edges.back() == doctest::Approx(0.5));
    for (size_t i = 1; i < edges.size(); ++i) CHECK(edges[i] > edges[i - 1]);

    Rng rng(31);
    const std::vector<Vec3> pts = random_points(rng, 100);
    std::vector<double> attr(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) attr[i] = pts[i].x + 0.1 * rng.uniform(-1, 1);
    const auto bins = moran_profile(pts, attr, log_bin_edges(0.05, 2.0, 4));
    CHECK(bins.size() == 4);
    for (const auto& b : bins)
        if (b.pairs > 0)
            CHECK(b.moran_i == doctest::Approx(brute_moran(pts, attr, b.lo, b.hi)).epsilon(1e-9));
}

TEST_CASE("bounding sphere radius of a unit sphere of points") {
    Rng rng(37);
    std::vector<Vec3> pts;
    for (int i = 0; i < 200; ++i) {
        Vec3 v{rng.normal(), rng.normal(), rng.normal()};
        pts.push_back(normalized(v));
    }
    // Antipodal pairing keeps the centroid at the origin exactly.
    const size_t half = pts.size();
    for (size_t i = 0; i < half; ++i) pts.push_back(-pts[i]);
    CHECK(bounding_sphere_radius(pts) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("compensation study on a synthetic trained-like scene") {
    Rng rng(71);
    // A dense blob of overlapping Gaussians stands in for a trained scene.
    GaussianCloud cloud = testing::random_scene(rng, 120);
    for (size_t i = 0; i < cloud.size(); ++i) cloud.opacity_logits[i] = rng.uniform(0.5, 2.0);
    const Camera cam = testing::test_camera(16);

    CompensationReport rep = compensation_study(cloud, cam, 30, 10, 4, 99);
    CHECK(rep.rows.size() == 8);
    for (const auto& row : rep.rows) {
        CHECK(row.dropped == 30);
        CHECK(row.mae >= 0.0);
    }
    // Equal drop counts per seed between the strategies.
    for (size_t i = 0; i + 1 < rep.rows.size(); i += 2)
        CHECK(rep.rows[i].dropped == rep.rows[i + 1].dropped);

    // drop_count 0 edge case: both MAEs exactly zero.
    CompensationReport zero = compensation_study(cloud, cam, 0, 10, 2, 5);
    for (const auto& row : zero.rows) {
        CHECK(row.mae == 0.0);
        CHECK(row.local_grad_mass == 0.0);
    }
}

TEST_CASE("compensation study rejects degenerate clouds") {
    Rng rng(73);
    GaussianCloud cloud = testing::random_scene(rng, 20);
    for (double& logit : cloud.opacity_logits) logit = -12.0;  // all ~ 0 opacity
    CHECK_THROWS_AS(compensation_study(cloud, testing::test_camera(8), 4, 3, 1, 0),
                    DegenerateInputError);
}
