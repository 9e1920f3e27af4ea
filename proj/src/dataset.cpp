#include "gradkit/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gradkit/rng.hpp"

namespace gradkit {

Dataset load_dataset(const std::string& path, double scale) {
    if (scale == 0.0) throw std::invalid_argument("feature scale must be nonzero");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);

    std::vector<double> features;
    std::vector<int> labels;
    std::size_t width = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream row(line);
        std::vector<double> vals;
        double v;
        while (row >> v) vals.push_back(v);
        // eof distinguishes a blank line from a row that died on a bad token
        if (!row.eof()) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-numeric token");
        }
        if (vals.empty()) continue;
        if (vals.size() < 2) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": row needs at least one feature and a label");
        }
        if (width == 0) {
            width = vals.size() - 1;
        } else if (vals.size() - 1 != width) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(width) + " features, got " +
                                     std::to_string(vals.size() - 1));
        }
        const double label = vals.back();
        const int li = static_cast<int>(label);
        if (label != static_cast<double>(li) || li < 0) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": label must be a non-negative integer");
        }
        for (std::size_t i = 0; i < width; ++i) features.push_back(vals[i] / scale);
        labels.push_back(li);
    }
    if (labels.empty()) throw std::runtime_error("dataset file has no samples: " + path);

    Dataset data;
    data.x = Tensor(std::move(features), {labels.size(), width});
    data.classes = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
    data.labels = std::move(labels);
    return data;
}

void Dataset::split_folds(int k, std::uint64_t seed) {
    folds = assign_folds(size(), k, seed);
    fold_count = k;
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices) {
    const std::size_t d = data.features();
    Dataset out;
    out.classes = data.classes;
    out.labels.reserve(indices.size());
    std::vector<double> rows;
    rows.reserve(indices.size() * d);
    for (std::size_t idx : indices) {
        if (idx >= data.size()) {
            throw std::invalid_argument("subset index " + std::to_string(idx) +
                                        " out of range for " + std::to_string(data.size()) +
                                        " samples");
        }
        const double* src = data.x.data.data() + idx * d;
        rows.insert(rows.end(), src, src + d);
        out.labels.push_back(data.labels[idx]);
    }
    if (indices.empty()) throw std::invalid_argument("subset needs at least one index");
    out.x = Tensor(std::move(rows), {indices.size(), d});
    return out;
}

std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("fold count must be at least 2, got " + std::to_string(k));
    if (static_cast<std::size_t>(k) > n) {
        throw std::invalid_argument("fold count " + std::to_string(k) + " exceeds sample count " +
                                    std::to_string(n));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(perm);
    std::vector<int> folds(n);
    for (std::size_t i = 0; i < n; ++i) {
        folds[perm[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return folds;
}

std::vector<std::size_t> fold_sizes(const std::vector<int>& folds, int k) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int f : folds) {
        if (f < 0 || f >= k) {
            throw std::invalid_argument("fold id " + std::to_string(f) + " outside [0, " +
                                        std::to_string(k) + ")");
        }
        ++sizes[static_cast<std::size_t>(f)];
    }
    return sizes;
}

std::vector<std::size_t> fold_indices(const std::vector<int>& folds, int fold) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < folds.size(); ++i) {
        if (folds[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> complement_indices(const std::vector<int>& folds, int fold) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < folds.size(); ++i) {
        if (folds[i] != fold) out.push_back(i);
    }
    return out;
}

}  // namespace gradkit
