#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gradkit/tensor.hpp"

namespace gradkit {

struct Dataset {
    Tensor x;                 // {samples, features}
    std::vector<int> labels;  // one label per row, in [0, classes)
    std::size_t classes = 0;
    std::vector<int> folds;   // empty until split_folds; else one fold id per row
    int fold_count = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t features() const { return x.shape.size() == 2 ? x.cols() : 0; }

    /// Seeded shuffle dealt round-robin into k folds (sizes differ by ≤ 1).
    void split_folds(int k, std::uint64_t seed);
};

/// Text rows of feature values followed by an integer class label, whitespace
/// separated. Features are divided by `scale` on load. Column count is fixed
/// by the first row.
Dataset load_dataset(const std::string& path, double scale = 16.0);

/// Row subset in the order given by `indices`.
Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices);

/// Fold id per sample: a seeded shuffle of 0..n-1 dealt round-robin, so fold
/// sizes differ by at most one.
std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed);

std::vector<std::size_t> fold_sizes(const std::vector<int>& folds, int k);
std::vector<std::size_t> fold_indices(const std::vector<int>& folds, int fold);
std::vector<std::size_t> complement_indices(const std::vector<int>& folds, int fold);

}  // namespace gradkit
