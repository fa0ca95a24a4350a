// SPDX-License-Identifier: Apache-2.0
#include "gsdrop/dropout.hpp"

#include <algorithm>

#include "gsdrop/errors.hpp"

namespace gsdrop {

void DropoutConfig::validate() const {
    if (pa_max < 0.0 || pa_max > 1.0)
        throw InvalidParameterError("DropoutConfig: pa_max must be in [0,1]");
    if (k < 0) throw InvalidParameterError("DropoutConfig: k must be non-negative");
    if (p_sh < 0.0 || p_sh > 1.0)
        throw InvalidParameterError("DropoutConfig: p_sh must be in [0,1]");
    if (total_iters <= 0) throw InvalidParameterError("DropoutConfig: total_iters must be > 0");
    for (size_t i = 1; i < lmax_milestones.size(); ++i)
        if (lmax_milestones[i].first < lmax_milestones[i - 1].first)
            throw InvalidParameterError("DropoutConfig: milestones must be sorted by iteration");
    for (const auto& [it, lmax] : lmax_milestones)
        if (lmax < 0 || lmax > kMaxShDegree)
            throw InvalidParameterError("DropoutConfig: milestone l_max out of [0,3]");
}

int DropoutConfig::current_lmax(int iteration) const {
    int lmax = 0;  // coarsest before the first milestone
    for (const auto& [it, value] : lmax_milestones) {
        if (iteration >= it) lmax = value;
    }
    return lmax;
}

double anchor_rate(int iteration, const DropoutConfig& config) {
    if (iteration < 0 || iteration > config.total_iters)
        throw InvalidParameterError("anchor_rate: iteration outside [0, total_iters]");
    return config.pa_max * double(iteration) / double(config.total_iters);
}

std::vector<uint32_t> select_anchors(size_t n_gaussians, double p_a, Rng& rng) {
    if (p_a < 0.0 || p_a > 1.0)
        throw InvalidParameterError("select_anchors: p_a must be in [0,1]");
    std::vector<uint32_t> anchors;
    for (size_t i = 0; i < n_gaussians; ++i)
        if (rng.bernoulli(p_a)) anchors.push_back(static_cast<uint32_t>(i));
    return anchors;  // built in ascending order
}

std::vector<uint32_t> build_dropout_set(const std::vector<Vec3>& positions,
                                        const std::vector<uint32_t>& anchors, int k,
                                        const KnnIndex& index) {
    if (static_cast<size_t>(k) >= positions.size())
        throw InvalidParameterError("build_dropout_set: k must be below the Gaussian count");
    std::vector<uint32_t> dropped;
    dropped.reserve(anchors.size() * (k + 1));
    for (uint32_t a : anchors) {
        dropped.push_back(a);
        const std::vector<uint32_t> nn = index.query_index(a, static_cast<size_t>(k));
        dropped.insert(dropped.end(), nn.begin(), nn.end());
    }
    std::sort(dropped.begin(), dropped.end());
    dropped.erase(std::unique(dropped.begin(), dropped.end()), dropped.end());
    return dropped;
}

std::vector<uint8_t> make_mask(size_t n, const std::vector<uint32_t>& dropped) {
    std::vector<uint8_t> mask(n, 1);
    for (uint32_t i : dropped) {
        if (i >= n) throw InvalidParameterError("make_mask: dropped index out of range");
        mask[i] = 0;
    }
    return mask;
}

std::vector<int> plan_sh_dropout(size_t n, int iteration, int max_degree,
                                 const DropoutConfig& config, Rng& rng) {
    std::vector<int> retain(n, max_degree);
    if (!config.sh_dropout_on || config.sh_random_baseline) return retain;
    const int lmax = std::min(config.current_lmax(iteration), max_degree);
    for (size_t i = 0; i < n; ++i)
        if (rng.bernoulli(config.p_sh)) retain[i] = lmax;
    return retain;
}

std::vector<uint8_t> plan_sh_random_baseline(size_t n, int iteration, int max_degree,
                                             const DropoutConfig& config, Rng& rng) {
    const int coeffs = sh_coeff_count(max_degree);
    std::vector<uint8_t> keep(n * 3 * coeffs, 1);
    if (max_degree == 0) return keep;
    // Match the expected number of zeroed coefficients of the degree scheme:
    // a selected Gaussian zeroes everything above l_max, so each degree>=1
    // coefficient is zeroed with probability p_sh * (C - C_keep)/(C - 1).
    const int lmax = std::min(config.current_lmax(iteration), max_degree);
    const double truncated_frac =
        double(coeffs - sh_coeff_count(lmax)) / double(coeffs - 1);
    const double p_zero = config.p_sh * truncated_frac;
    for (size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c)
            for (int j = 1; j < coeffs; ++j)
                if (rng.bernoulli(p_zero)) keep[(i * 3 + c) * coeffs + j] = 0;
    return keep;
}

DropoutPlan make_plan(const GaussianCloud& cloud, std::optional<int> iteration,
                      const DropoutConfig& config, const KnnIndex* knn_index, Rng& rng) {
    config.validate();
    const size_t n = cloud.size();
    DropoutPlan plan;
    plan.sh_retain.assign(n, cloud.max_degree);
    plan.opacity_mask.assign(n, 1);
    plan.l_max = cloud.max_degree;
    if (!iteration.has_value()) return plan;  // evaluation: identity plan

    const int it = *iteration;
    if (config.anchor_dropout_on) {
        plan.p_a = anchor_rate(it, config);
        plan.anchors = select_anchors(n, plan.p_a, rng);
        if (!plan.anchors.empty()) {
            if (!knn_index)
                throw InvalidParameterError("make_plan: anchor dropout requires a kNN index");
            const int k = std::min<int>(config.k, static_cast<int>(n) - 1);
            plan.dropped = build_dropout_set(cloud.positions, plan.anchors, k, *knn_index);
            plan.opacity_mask = make_mask(n, plan.dropped);
        }
    }
    if (config.sh_dropout_on) {
        plan.l_max = std::min(config.current_lmax(it), cloud.max_degree);
        if (config.sh_random_baseline)
            plan.sh_coeff_mask = plan_sh_random_baseline(n, it, cloud.max_degree, config, rng);
        else
            plan.sh_retain = plan_sh_dropout(n, it, cloud.max_degree, config, rng);
    }
    return plan;
}

}  // namespace gsdrop
