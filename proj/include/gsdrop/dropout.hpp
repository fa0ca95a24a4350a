// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gsdrop/gaussian.hpp"
#include "gsdrop/kdtree.hpp"
#include "gsdrop/rng.hpp"

namespace gsdrop {

/// Schedules and switches for the two training-time regularizers: structured
/// anchor dropout over opacity, and degree-scheduled SH dropout.
struct DropoutConfig {
    double pa_max = 0.02;  // anchor ratio ceiling, reached at total_iters
    int k = 10;            // neighbors dropped around each anchor
    double p_sh = 0.2;     // per-Gaussian SH truncation probability
    /// (iteration, l_max) pairs; the active l_max is the latest milestone at
    /// or before the current iteration (0 before the first milestone).
    std::vector<std::pair<int, int>> lmax_milestones{{0, 0}, {2000, 0}, {4000, 1}, {6000, 2}};
    int total_iters = 10000;
    uint64_t rng_seed = 0;

    bool anchor_dropout_on = true;
    bool sh_dropout_on = true;
    /// Ablation baseline: zero individual SH coefficients at random instead
    /// of truncating whole degrees.
    bool sh_random_baseline = false;

    /// kNN index refresh cadence in iterations (positions move as training
    /// progresses; 1 rebuilds every iteration).
    int knn_rebuild_interval = 1;

    void validate() const;

    /// Active l_max at an iteration.
    int current_lmax(int iteration) const;
};

/// Per-iteration dropout decision: which Gaussians are silenced and how many
/// SH degrees each one keeps.
struct DropoutPlan {
    std::vector<uint8_t> opacity_mask;   // m_i: 0 = dropped
    std::vector<int> sh_retain;          // per-Gaussian retained degree
    std::vector<uint32_t> anchors;       // sorted anchor indices
    std::vector<uint32_t> dropped;       // sorted, superset of anchors
    std::vector<uint8_t> sh_coeff_mask;  // only in the random-SH baseline mode
    double p_a = 0.0;                    // sampling rate this plan was built with
    int l_max = 0;                       // active SH cap this iteration

    bool has_opacity_dropout() const { return !dropped.empty(); }
    size_t dropped_count() const { return dropped.size(); }
};

/// Linear anchor-rate ramp: pa_max * iteration / total_iters.
double anchor_rate(int iteration, const DropoutConfig& config);

/// Independent Bernoulli(p_a) selection per Gaussian; sorted unique indices.
std::vector<uint32_t> select_anchors(size_t n_gaussians, double p_a, Rng& rng);

/// Union of the anchors and each anchor's k nearest neighbors (anchors
/// excluded from their own neighbor lists). Throws when k >= N.
std::vector<uint32_t> build_dropout_set(const std::vector<Vec3>& positions,
                                        const std::vector<uint32_t>& anchors, int k,
                                        const KnnIndex& index);

/// Binary mask with m_i = 0 iff i is in `dropped`.
std::vector<uint8_t> make_mask(size_t n, const std::vector<uint32_t>& dropped);

/// Per-Gaussian retained SH degree for one iteration: selected Gaussians
/// (probability p_sh) keep degrees up to the scheduled l_max, everyone else
/// keeps all of max_degree. Disabled SH dropout returns all max_degree.
std::vector<int> plan_sh_dropout(size_t n, int iteration, int max_degree,
                                 const DropoutConfig& config, Rng& rng);

/// Random-SH ablation baseline: zero individual degree>=1 coefficients with a
/// probability matched to the expected fraction the degree scheme zeroes.
/// Returns a keep mask of n * 3 * (L+1)^2 bytes.
std::vector<uint8_t> plan_sh_random_baseline(size_t n, int iteration, int max_degree,
                                             const DropoutConfig& config, Rng& rng);

/// Full per-iteration plan. Passing std::nullopt for the iteration (the
/// evaluation path) returns the identity plan: all-ones mask, full SH.
DropoutPlan make_plan(const GaussianCloud& cloud, std::optional<int> iteration,
                      const DropoutConfig& config, const KnnIndex* knn_index, Rng& rng);

}  // namespace gsdrop
