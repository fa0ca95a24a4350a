// SPDX-License-Identifier: Apache-2.0
#include "gsdrop/spatial_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gsdrop/dropout.hpp"
#include "gsdrop/errors.hpp"
#include "gsdrop/metrics.hpp"
#include "gsdrop/rng.hpp"

namespace gsdrop {

namespace {

struct MoranAccum {
    double num = 0.0;
    int64_t pairs = 0;
};

/// Shared double-sum core. Enumerates ordered pairs via radius queries; when
/// the full enumeration would exceed kMoranMaxPairs, pairs are kept with a
/// fixed-seed Bernoulli thinning (the estimate stays unbiased in N/W * num).
MoranAccum moran_sum(const std::vector<Vec3>& positions, const std::vector<double>& centered,
                     const KnnIndex& index, double lo, double hi) {
    const size_t n = positions.size();
    // Counting pass to decide whether thinning is needed.
    int64_t total = 0;
    std::vector<std::vector<uint32_t>> hits(n);
    for (size_t i = 0; i < n; ++i) {
        std::vector<uint32_t> within = index.radius_query(positions[i], hi);
        std::vector<uint32_t>& keep = hits[i];
        keep.reserve(within.size());
        for (uint32_t j : within) {
            if (j == i) continue;
            const double d = norm(positions[i] - positions[j]);
            if (d >= lo && d < hi) keep.push_back(j);
        }
        total += static_cast<int64_t>(keep.size());
    }
    MoranAccum acc;
    if (total <= kMoranMaxPairs) {
        for (size_t i = 0; i < n; ++i)
            for (uint32_t j : hits[i]) acc.num += centered[i] * centered[j];
        acc.pairs = total;
        return acc;
    }
    const double p_keep = double(kMoranMaxPairs) / double(total);
    Rng rng(0x5eed);
    for (size_t i = 0; i < n; ++i)
        for (uint32_t j : hits[i])
            if (rng.bernoulli(p_keep)) {
                acc.num += centered[i] * centered[j];
                acc.pairs++;
            }
    return acc;
}

std::vector<double> center(const std::vector<double>& attribute, double* out_denom) {
    double mean = 0.0;
    for (double v : attribute) mean += v;
    mean /= double(attribute.size());
    std::vector<double> centered(attribute.size());
    double denom = 0.0;
    for (size_t i = 0; i < attribute.size(); ++i) {
        centered[i] = attribute[i] - mean;
        denom += centered[i] * centered[i];
    }
    *out_denom = denom;
    return centered;
}

}  // namespace

double morans_i(const std::vector<Vec3>& positions, const std::vector<double>& attribute,
                double lo, double hi) {
    if (positions.size() != attribute.size() || positions.empty())
        throw InvalidParameterError("morans_i: positions and attribute sizes disagree");
    if (!(hi > lo) || lo < 0.0)
        throw InvalidParameterError("morans_i: need 0 <= lo < hi");
    double denom = 0.0;
    const std::vector<double> centered = center(attribute, &denom);
    if (denom <= 0.0) throw DegenerateInputError("morans_i: attribute variance is zero");
    const KnnIndex index(positions);
    const MoranAccum acc = moran_sum(positions, centered, index, lo, hi);
    if (acc.pairs == 0) throw EmptyBinError("morans_i: no pair in the distance band");
    const double n = double(positions.size());
    return (n / double(acc.pairs)) * acc.num / denom;
}

std::vector<MoranBin> moran_profile(const std::vector<Vec3>& positions,
                                    const std::vector<double>& attribute,
                                    const std::vector<double>& edges) {
    if (edges.size() < 2) throw InvalidParameterError("moran_profile: need at least one bin");
    double denom = 0.0;
    const std::vector<double> centered = center(attribute, &denom);
    if (denom <= 0.0) throw DegenerateInputError("moran_profile: attribute variance is zero");
    const KnnIndex index(positions);
    const double n = double(positions.size());
    std::vector<MoranBin> bins;
    for (size_t b = 0; b + 1 < edges.size(); ++b) {
        MoranBin bin;
        bin.lo = edges[b];
        bin.hi = edges[b + 1];
        const MoranAccum acc = moran_sum(positions, centered, index, bin.lo, bin.hi);
        bin.pairs = acc.pairs;
        bin.moran_i = acc.pairs > 0 ? (n / double(acc.pairs)) * acc.num / denom
                                    : std::numeric_limits<double>::quiet_NaN();
        bins.push_back(bin);
    }
    return bins;
}

std::vector<double> log_bin_edges(double lo, double hi, int n_bins) {
    if (!(lo > 0.0) || !(hi > lo) || n_bins < 1)
        throw InvalidParameterError("log_bin_edges: need 0 < lo < hi and n_bins >= 1");
    std::vector<double> edges(n_bins + 1);
    const double step = std::log(hi / lo) / n_bins;
    for (int i = 0; i <= n_bins; ++i) edges[i] = lo * std::exp(step * i);
    return edges;
}

std::vector<double> opacity_attribute(const GaussianCloud& cloud) {
    std::vector<double> out(cloud.size());
    for (size_t i = 0; i < cloud.size(); ++i) out[i] = sigmoid(cloud.opacity_logits[i]);
    return out;
}

std::vector<double> color_attribute(const GaussianCloud& cloud) {
    std::vector<double> out(cloud.size());
    const int coeffs = cloud.coeffs_per_channel();
    for (size_t i = 0; i < cloud.size(); ++i) {
        const double* sh = cloud.sh_at(i);
        out[i] = (sh[0] + sh[coeffs] + sh[2 * coeffs]) / 3.0;
    }
    return out;
}

double bounding_sphere_radius(const std::vector<Vec3>& points) {
    if (points.empty()) throw InvalidParameterError("bounding_sphere_radius: empty input");
    Vec3 center{0, 0, 0};
    for (const Vec3& p : points) center += p;
    center = center / double(points.size());
    double radius = 0.0;
    for (const Vec3& p : points) radius = std::max(radius, norm(p - center));
    return radius;
}

CompensationReport compensation_study(const GaussianCloud& cloud, const Camera& camera,
                                      size_t drop_count, int k, int n_seeds,
                                      uint64_t base_seed, const RenderOptions& opts) {
    cloud.validate();
    const size_t n = cloud.size();
    if (drop_count > n / 2)
        throw InvalidParameterError("compensation_study: drop_count must be at most N/2");
    double max_opacity = 0.0;
    for (double logit : cloud.opacity_logits)
        max_opacity = std::max(max_opacity, sigmoid(logit));
    if (max_opacity < 0.01)
        throw DegenerateInputError("compensation_study: cloud is all-transparent");

    const RenderBuffers full = render_forward(cloud, camera, opts);
    const KnnIndex index(cloud.positions);
    const std::vector<uint8_t> all_ones(n, 1);

    // Survivor gradient mass near the dropped set, under the L1 photometric
    // loss of the masked render against the full render.
    auto local_grad_mass = [&](const std::vector<uint8_t>& mask,
                               const std::vector<uint32_t>& dropped) {
        const RenderBuffers masked = render_forward(cloud, camera, opts, &mask);
        Image upstream(camera.width, camera.height);
        const double scale = 1.0 / double(upstream.element_count());
        for (size_t i = 0; i < upstream.data.size(); ++i) {
            const double diff = masked.image.data[i] - full.image.data[i];
            upstream.data[i] = diff > 0 ? scale : (diff < 0 ? -scale : 0.0);
        }
        const CloudGradients g = render_backward(cloud, camera, masked, upstream, opts.threads);
        std::set<uint32_t> near;
        for (uint32_t j : dropped) {
            const Vec3& s = cloud.log_scales[j];
            const double sigma =
                std::max({std::exp(s.x), std::exp(s.y), std::exp(s.z)});
            for (uint32_t i : index.radius_query(cloud.positions[j], 3.0 * sigma)) near.insert(i);
        }
        double mass = 0.0;
        for (uint32_t i : near)
            if (mask[i]) mass += std::abs(g.opacity_logits[i]);
        return mass;
    };

    CompensationReport report;
    for (int s = 0; s < n_seeds; ++s) {
        const uint64_t seed = base_seed + static_cast<uint64_t>(s);
        Rng rng(seed);

        // Clustered: grow anchor neighborhoods until the set reaches drop_count.
        std::set<uint32_t> clustered;
        const int k_eff = std::min<int>(k, static_cast<int>(n) - 1);
        while (clustered.size() < drop_count) {
            const uint32_t a = static_cast<uint32_t>(rng.uniform_index(n));
            clustered.insert(a);
            for (uint32_t j : index.query_index(a, k_eff)) {
                clustered.insert(j);
                if (clustered.size() >= drop_count) break;
            }
        }
        const std::vector<uint32_t> drop_clustered(clustered.begin(), clustered.end());

        // Scattered: the same number of uniformly chosen Gaussians.
        const std::vector<size_t> picks =
            rng.sample_without_replacement(n, drop_clustered.size());
        std::vector<uint32_t> drop_scattered(picks.begin(), picks.end());

        for (const auto& [name, dropped] :
             {std::pair{std::string("clustered"), drop_clustered},
              std::pair{std::string("scattered"), drop_scattered}}) {
            const std::vector<uint8_t> mask = make_mask(n, dropped);
            CompensationRow row;
            row.seed = seed;
            row.strategy = name;
            row.dropped = dropped.size();
            const RenderBuffers masked = render_forward(cloud, camera, opts, &mask);
            row.mae = mae(masked.image, full.image);
            row.local_grad_mass = dropped.empty() ? 0.0 : local_grad_mass(mask, dropped);
            report.rows.push_back(row);
            if (name == "clustered") {
                report.mean_mae_clustered += row.mae;
                report.mean_grad_clustered += row.local_grad_mass;
            } else {
                report.mean_mae_scattered += row.mae;
                report.mean_grad_scattered += row.local_grad_mass;
            }
        }
    }
    if (n_seeds > 0) {
        report.mean_mae_clustered /= n_seeds;
        report.mean_mae_scattered /= n_seeds;
        report.mean_grad_clustered /= n_seeds;
        report.mean_grad_scattered /= n_seeds;
    }
    return report;
}

}  // namespace gsdrop
