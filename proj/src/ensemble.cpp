#include "gradkit/ensemble.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace gradkit {

void PredictionSet::validate() const {
    if (probs.shape.size() != 2) {
        throw std::invalid_argument("prediction scores must be 2-D, got shape " +
                                    shape_str(probs.shape));
    }
    if (probs.rows() != labels.size()) {
        throw std::invalid_argument("prediction set \"" + run_id + "\" has " +
                                    std::to_string(probs.rows()) + " score rows for " +
                                    std::to_string(labels.size()) + " labels");
    }
    if (labels.empty()) {
        throw std::invalid_argument("prediction set \"" + run_id + "\" is empty");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes()) {
            throw std::invalid_argument("prediction set \"" + run_id + "\": label " +
                                        std::to_string(labels[i]) + " at row " + std::to_string(i) +
                                        " outside [0, " + std::to_string(classes()) + ")");
        }
    }
}

PredictionSet fuse_sum(const std::vector<PredictionSet>& members) {
    if (members.empty()) throw std::invalid_argument("fusion needs at least one member");
    for (const PredictionSet& m : members) m.validate();

    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return members[a].run_id < members[b].run_id;
    });

    const PredictionSet& head = members[order[0]];
    for (std::size_t oi = 1; oi < order.size(); ++oi) {
        const PredictionSet& m = members[order[oi]];
        if (m.samples() != head.samples() || m.classes() != head.classes()) {
            throw std::invalid_argument("member \"" + m.run_id + "\" shape " +
                                        shape_str(m.probs.shape) + " does not match \"" +
                                        head.run_id + "\" shape " + shape_str(head.probs.shape));
        }
        if (m.fold != head.fold) {
            throw std::invalid_argument("member \"" + m.run_id + "\" fold " +
                                        std::to_string(m.fold) + " does not match \"" +
                                        head.run_id + "\" fold " + std::to_string(head.fold));
        }
        if (m.labels != head.labels) {
            throw std::invalid_argument("member \"" + m.run_id +
                                        "\" labels disagree with \"" + head.run_id + "\"");
        }
    }

    PredictionSet fused;
    fused.probs = Tensor::zeros(head.probs.shape);
    fused.labels = head.labels;
    fused.fold = head.fold;
    fused.variant = "fused";
    fused.seed = 0;
    const double inv = 1.0 / static_cast<double>(members.size());
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const PredictionSet& m = members[order[oi]];
        for (std::size_t i = 0; i < fused.probs.size(); ++i) {
            fused.probs.data[i] += m.probs.data[i];
        }
        if (oi > 0) fused.run_id += '+';
        fused.run_id += m.run_id;
    }
    for (double& v : fused.probs.data) v *= inv;
    return fused;
}

std::vector<int> argmax_rows(const Tensor& scores) {
    if (scores.shape.size() != 2) {
        throw std::invalid_argument("argmax expects a 2-D tensor, got shape " +
                                    shape_str(scores.shape));
    }
    std::vector<int> out(scores.rows());
    for (std::size_t r = 0; r < scores.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < scores.cols(); ++c) {
            if (scores.at(r, c) > scores.at(r, best)) best = c;
        }
        out[r] = static_cast<int>(best);
    }
    return out;
}

double accuracy(const std::vector<int>& labels, const std::vector<int>& preds) {
    if (labels.empty()) throw std::invalid_argument("accuracy of an empty set is undefined");
    if (labels.size() != preds.size()) {
        throw std::invalid_argument("got " + std::to_string(preds.size()) + " predictions for " +
                                    std::to_string(labels.size()) + " labels");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == preds[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double accuracy(const PredictionSet& p) {
    p.validate();
    return accuracy(p.labels, argmax_rows(p.probs));
}

std::vector<std::size_t> confusion_matrix(const std::vector<int>& labels,
                                          const std::vector<int>& preds, std::size_t classes) {
    if (labels.size() != preds.size()) {
        throw std::invalid_argument("got " + std::to_string(preds.size()) + " predictions for " +
                                    std::to_string(labels.size()) + " labels");
    }
    std::vector<std::size_t> cm(classes * classes, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        const int p = preds[i];
        if (y < 0 || static_cast<std::size_t>(y) >= classes || p < 0 ||
            static_cast<std::size_t>(p) >= classes) {
            throw std::invalid_argument("class index outside [0, " + std::to_string(classes) +
                                        ") at row " + std::to_string(i));
        }
        ++cm[static_cast<std::size_t>(y) * classes + static_cast<std::size_t>(p)];
    }
    return cm;
}

double f_measure(const std::vector<int>& labels, const std::vector<int>& preds,
                 std::size_t classes) {
    if (labels.empty()) throw std::invalid_argument("F-measure of an empty set is undefined");
    if (classes == 0) throw std::invalid_argument("F-measure needs at least one class");
    const std::vector<std::size_t> cm = confusion_matrix(labels, preds, classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        const std::size_t tp = cm[c * classes + c];
        std::size_t fp = 0;
        std::size_t fn = 0;
        for (std::size_t o = 0; o < classes; ++o) {
            if (o == c) continue;
            fp += cm[o * classes + c];
            fn += cm[c * classes + o];
        }
        const std::size_t den = 2 * tp + fp + fn;
        if (den != 0) {
            sum += 2.0 * static_cast<double>(tp) / static_cast<double>(den);
        }
    }
    return sum / static_cast<double>(classes);
}

double f_measure(const PredictionSet& p) {
    p.validate();
    return f_measure(p.labels, argmax_rows(p.probs), p.classes());
}

EvalReport pooled_report(const std::vector<PredictionSet>& per_fold, const std::string& method,
                         std::size_t members) {
    if (per_fold.empty()) throw std::invalid_argument("report needs at least one fold");
    std::vector<std::size_t> order(per_fold.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return per_fold[a].fold < per_fold[b].fold; });
    const std::size_t classes = per_fold[order[0]].classes();

    EvalReport rep;
    rep.method = method;
    rep.members = members;
    std::vector<int> all_labels;
    std::vector<int> all_preds;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const PredictionSet& p = per_fold[order[oi]];
        p.validate();
        if (oi > 0 && p.fold == per_fold[order[oi - 1]].fold) {
            throw std::invalid_argument("duplicate fold id " + std::to_string(p.fold) +
                                        " in report input");
        }
        if (p.classes() != classes) {
            throw std::invalid_argument("fold " + std::to_string(p.fold) + " has " +
                                        std::to_string(p.classes()) + " classes, expected " +
                                        std::to_string(classes));
        }
        const std::vector<int> preds = argmax_rows(p.probs);
        FoldMetrics fm;
        fm.fold = p.fold;
        fm.samples = p.samples();
        fm.accuracy = accuracy(p.labels, preds);
        fm.f_measure = f_measure(p.labels, preds, classes);
        rep.folds.push_back(fm);
        all_labels.insert(all_labels.end(), p.labels.begin(), p.labels.end());
        all_preds.insert(all_preds.end(), preds.begin(), preds.end());
    }
    rep.accuracy = accuracy(all_labels, all_preds);
    rep.f_measure = f_measure(all_labels, all_preds, classes);
    return rep;
}

EvalReport kfold_protocol(const Dataset& data, int k, std::uint64_t fold_seed,
                          const FoldRunner& runner, const std::string& method) {
    if (k < 2) throw std::invalid_argument("k-fold protocol needs k >= 2, got " + std::to_string(k));
    const std::vector<int> folds = assign_folds(data.size(), k, fold_seed);
    for (std::size_t sz : fold_sizes(folds, k)) {
        if (sz == 0) throw std::invalid_argument("fold with zero samples");
    }
    std::vector<PredictionSet> per_fold;
    per_fold.reserve(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        const Dataset train = subset(data, complement_indices(folds, f));
        const Dataset held = subset(data, fold_indices(folds, f));
        PredictionSet p = runner(train, held, f);
        p.validate();
        if (p.labels != held.labels) {
            throw std::invalid_argument("runner predictions for fold " + std::to_string(f) +
                                        " do not cover the held-out samples in order");
        }
        if (p.fold != f) {
            throw std::invalid_argument("runner returned fold " + std::to_string(p.fold) +
                                        " for held-out fold " + std::to_string(f));
        }
        per_fold.push_back(std::move(p));
    }
    return pooled_report(per_fold, method, 1);
}

}  // namespace gradkit
