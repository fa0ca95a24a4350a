// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gsdrop/camera.hpp"
#include "gsdrop/gaussian.hpp"
#include "gsdrop/kdtree.hpp"
#include "gsdrop/render.hpp"

namespace gsdrop {

/// Pair enumeration is subsampled (fixed seed) above this many ordered pairs.
constexpr int64_t kMoranMaxPairs = 2'000'000;

struct MoranBin {
    double lo = 0.0, hi = 0.0;
    double moran_i = 0.0;
    int64_t pairs = 0;  // ordered pair count W
};

struct MoranResult {
    std::string attribute;
    std::vector<MoranBin> bins;
};

/// Moran's I with binary distance-band weights:
///   I = (N/W) * sum_ij w_ij (x_i - xbar)(x_j - xbar) / sum_i (x_i - xbar)^2
/// with w_ij = 1 iff lo <= |p_i - p_j| < hi and i != j, W = sum w_ij.
/// Throws DegenerateInputError on zero attribute variance and EmptyBinError
/// when no pair falls inside the band.
double morans_i(const std::vector<Vec3>& positions, const std::vector<double>& attribute,
                double lo, double hi);

/// Moran's I across a set of distance bins sharing one kd-tree; bins are
/// [edges[b], edges[b+1]). Empty bins are reported with pairs = 0 and NaN.
std::vector<MoranBin> moran_profile(const std::vector<Vec3>& positions,
                                    const std::vector<double>& attribute,
                                    const std::vector<double>& edges);

/// Logarithmically spaced bin edges (n_bins+1 values).
std::vector<double> log_bin_edges(double lo, double hi, int n_bins);

/// Scalar attributes the pilot analysis runs on: opacity = sigmoid(logit),
/// color = mean of the three degree-0 SH coefficients.
std::vector<double> opacity_attribute(const GaussianCloud& cloud);
std::vector<double> color_attribute(const GaussianCloud& cloud);

/// Radius of the bounding sphere of a point set (centered at the centroid).
double bounding_sphere_radius(const std::vector<Vec3>& points);

struct CompensationRow {
    uint64_t seed = 0;
    std::string strategy;  // "clustered" (anchors+neighbors) or "scattered"
    double mae = 0.0;
    double local_grad_mass = 0.0;
    size_t dropped = 0;
};

struct CompensationReport {
    std::vector<CompensationRow> rows;
    double mean_mae_clustered = 0.0, mean_mae_scattered = 0.0;
    double mean_grad_clustered = 0.0, mean_grad_scattered = 0.0;
};

/// Clustered-vs-scattered drop comparison on a trained cloud. Per seed,
/// builds a clustered drop set (random anchors plus their k nearest
/// neighbors, grown until it reaches drop_count) and a scattered set of the
/// same size, then reports the MAE of each masked render against the full
/// render and the summed |opacity gradient| over surviving Gaussians within
/// 3 sigma of the dropped set, under the L1 photometric loss against the
/// full render.
CompensationReport compensation_study(const GaussianCloud& cloud, const Camera& camera,
                                      size_t drop_count, int k, int n_seeds,
                                      uint64_t base_seed, const RenderOptions& opts = {});

}  // namespace gsdrop
