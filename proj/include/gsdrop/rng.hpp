// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace gsdrop {

/// Seedable random source shared by plan sampling, view shuffling, and
/// synthetic data generation. All draws go through these helpers so that
/// a seed fixes the entire stream.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : gen_(seed) {}

    void reseed(uint64_t seed) { gen_.seed(seed); }

    /// Uniform in [0, 1).
    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
    }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }

    /// Uniform integer in [0, n).
    size_t uniform_index(size_t n) {
        return std::uniform_int_distribution<size_t>(0, n - 1)(gen_);
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform() < p;
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(gen_);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        std::shuffle(v.begin(), v.end(), gen_);
    }

    /// Sample k distinct indices from [0, n) without replacement, sorted.
    std::vector<size_t> sample_without_replacement(size_t n, size_t k) {
        std::vector<size_t> all(n);
        for (size_t i = 0; i < n; ++i) all[i] = i;
        shuffle(all);
        all.resize(std::min(k, n));
        std::sort(all.begin(), all.end());
        return all;
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace gsdrop
