#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gradkit/dataset.hpp"
#include "gradkit/tensor.hpp"

namespace gradkit {

/// Per-sample class scores for one trained run. Rows are softmax
/// probabilities on the standard path; fusion itself only assumes rows are
/// comparable scores, so a raw-logit route works through the same type.
struct PredictionSet {
    Tensor probs;             // {samples, classes}
    std::vector<int> labels;  // ground truth per row
    std::string run_id;
    std::string variant;
    std::uint64_t seed = 0;
    int fold = -1;            // -1 when the set covers the whole dataset

    std::size_t samples() const { return labels.size(); }
    std::size_t classes() const { return probs.shape.size() == 2 ? probs.cols() : 0; }
    void validate() const;  // shape and label consistency; row sums are an IO concern
};

/// Componentwise sum over members divided by member count. Members are
/// summed in run-id order so the result does not depend on argument order.
PredictionSet fuse_sum(const std::vector<PredictionSet>& members);

std::vector<int> argmax_rows(const Tensor& scores);  // ties break toward the lowest index

double accuracy(const std::vector<int>& labels, const std::vector<int>& preds);
double accuracy(const PredictionSet& p);

/// Confusion counts flattened row-major: entry [truth * classes + predicted].
std::vector<std::size_t> confusion_matrix(const std::vector<int>& labels,
                                          const std::vector<int>& preds, std::size_t classes);

/// Macro-averaged F1 over all classes. Per class F1 = 2TP / (2TP + FP + FN),
/// taken as 0 when that denominator is 0.
double f_measure(const std::vector<int>& labels, const std::vector<int>& preds,
                 std::size_t classes);
double f_measure(const PredictionSet& p);

struct FoldMetrics {
    int fold = 0;
    std::size_t samples = 0;
    double accuracy = 0.0;
    double f_measure = 0.0;
};

struct EvalReport {
    std::string method;
    std::size_t members = 1;
    double accuracy = 0.0;   // pooled over all held-out folds
    double f_measure = 0.0;  // pooled, macro-averaged
    std::vector<FoldMetrics> folds;
};

/// Pooled metrics over per-fold held-out predictions. Sets must carry
/// distinct fold ids; pooling concatenates them in ascending fold order.
EvalReport pooled_report(const std::vector<PredictionSet>& per_fold, const std::string& method,
                         std::size_t members);

/// Trains and evaluates via the runner on each of k held-out folds drawn
/// with the given assignment seed, then pools the results.
using FoldRunner =
    std::function<PredictionSet(const Dataset& train, const Dataset& held_out, int fold)>;
EvalReport kfold_protocol(const Dataset& data, int k, std::uint64_t fold_seed,
                          const FoldRunner& runner, const std::string& method = "kfold");

}  // namespace gradkit
