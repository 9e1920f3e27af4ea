#include "gradkit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "gradkit/ensemble.hpp"

namespace gradkit {

namespace {

bool square_side(std::size_t width, std::size_t& side) {
    const auto s = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(width))));
    if (s * s != width || s == 0) return false;
    side = s;
    return true;
}

}  // namespace

void AugmentConfig::validate() const {
    if (!std::isfinite(scale_lo) || !std::isfinite(scale_hi) || scale_lo <= 0.0) {
        throw std::invalid_argument("scale factors must be finite and positive");
    }
    if (scale_lo > scale_hi) {
        throw std::invalid_argument("scale range is empty: [" + std::to_string(scale_lo) + ", " +
                                    std::to_string(scale_hi) + "]");
    }
}

void TrainConfig::validate() const {
    if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
    augment.validate();
}

void flip_horizontal(double* img, std::size_t side) {
    for (std::size_t r = 0; r < side; ++r) {
        double* row = img + r * side;
        std::reverse(row, row + side);
    }
}

void flip_vertical(double* img, std::size_t side) {
    for (std::size_t r = 0; r < side / 2; ++r) {
        double* a = img + r * side;
        double* b = img + (side - 1 - r) * side;
        std::swap_ranges(a, a + side, b);
    }
}

void scale_image(double* dst, const double* src, std::size_t side, double sy, double sx) {
    if (side == 0) throw std::invalid_argument("image side must be positive");
    if (sy <= 0.0 || sx <= 0.0) throw std::invalid_argument("scale factors must be positive");
    const double center = (static_cast<double>(side) - 1.0) / 2.0;
    const double hi = static_cast<double>(side) - 1.0;
    for (std::size_t r = 0; r < side; ++r) {
        // inverse map: where in the source does this output pixel land
        double ry = center + (static_cast<double>(r) - center) / sy;
        ry = std::clamp(ry, 0.0, hi);
        const std::size_t r0 = static_cast<std::size_t>(ry);
        const std::size_t r1 = std::min(r0 + 1, side - 1);
        const double fr = ry - static_cast<double>(r0);
        for (std::size_t c = 0; c < side; ++c) {
            double rx = center + (static_cast<double>(c) - center) / sx;
            rx = std::clamp(rx, 0.0, hi);
            const std::size_t c0 = static_cast<std::size_t>(rx);
            const std::size_t c1 = std::min(c0 + 1, side - 1);
            const double fc = rx - static_cast<double>(c0);
            const double v00 = src[r0 * side + c0];
            const double v01 = src[r0 * side + c1];
            const double v10 = src[r1 * side + c0];
            const double v11 = src[r1 * side + c1];
            // lerp form keeps constant neighborhoods exact
            const double top = v00 + fc * (v01 - v00);
            const double bot = v10 + fc * (v11 - v10);
            dst[r * side + c] = top + fr * (bot - top);
        }
    }
}

Tensor augment_batch(const Tensor& x, const AugmentConfig& cfg, Rng& rng, std::size_t* skipped) {
    cfg.validate();
    if (x.shape.size() != 2) {
        throw std::invalid_argument("augmentation expects a 2-D batch, got shape " +
                                    shape_str(x.shape));
    }
    if (!cfg.enabled) return x;
    std::size_t side = 0;
    if (!square_side(x.cols(), side)) {
        if (skipped != nullptr) *skipped += x.rows();
        return x;
    }
    Tensor out = x;
    std::vector<double> work(side * side);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double* img = out.data.data() + r * x.cols();
        if (cfg.reflect) {
            if (rng.coin_flip()) flip_horizontal(img, side);
            if (rng.coin_flip()) flip_vertical(img, side);
        }
        const double sy = rng.uniform(cfg.scale_lo, cfg.scale_hi);
        const double sx = rng.uniform(cfg.scale_lo, cfg.scale_hi);
        std::copy(img, img + side * side, work.begin());
        scale_image(img, work.data(), side, sy, sx);
    }
    return out;
}

namespace {

void check_fold_arg(const Dataset& data, int fold) {
    if (fold == -1) return;
    if (data.folds.empty()) {
        throw std::invalid_argument("dataset has no fold assignment; call split_folds first");
    }
    if (fold < 0 || fold >= data.fold_count) {
        throw std::invalid_argument("fold " + std::to_string(fold) + " outside [0, " +
                                    std::to_string(data.fold_count) + ")");
    }
}

std::vector<std::size_t> training_rows(const Dataset& data, int fold) {
    if (fold == -1) {
        std::vector<std::size_t> all(data.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    return complement_indices(data.folds, fold);
}

}  // namespace

TrainResult train(const ModelSpec& spec, const Dataset& data, int fold,
                  const OptimConfig& optim_cfg, const TrainConfig& train_cfg) {
    spec.validate();
    optim_cfg.validate();
    train_cfg.validate();
    check_fold_arg(data, fold);
    if (data.size() == 0) throw std::invalid_argument("dataset is empty");
    if (data.features() != spec.input_width()) {
        throw std::invalid_argument("dataset features " + std::to_string(data.features()) +
                                    " do not match model input width " +
                                    std::to_string(spec.input_width()));
    }
    if (data.classes != spec.class_count()) {
        throw std::invalid_argument("dataset has " + std::to_string(data.classes) +
                                    " classes, model outputs " +
                                    std::to_string(spec.class_count()));
    }

    const std::vector<std::size_t> rows_idx = training_rows(data, fold);
    if (rows_idx.empty()) throw std::invalid_argument("training split is empty");
    const std::vector<std::size_t> held_idx =
        fold == -1 ? std::vector<std::size_t>{} : fold_indices(data.folds, fold);
    const Dataset held = held_idx.empty() ? Dataset{} : subset(data, held_idx);

    const std::size_t n = rows_idx.size();
    const std::size_t d = data.features();
    Rng init_rng(spec.seed);
    ModelParams params = init_params(spec, init_rng);
    Rng rng(train_cfg.seed);
    Optimizer opt(optim_cfg, params.tensors);
    TrainResult res;
    res.history.reserve(train_cfg.epochs);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    long update = 0;
    for (std::size_t epoch = 0; epoch < train_cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += train_cfg.batch_size) {
            const std::size_t stop = std::min(start + train_cfg.batch_size, n);
            const std::size_t bsz = stop - start;
            std::vector<double> rows;
            rows.reserve(bsz * d);
            std::vector<int> labels;
            labels.reserve(bsz);
            for (std::size_t i = start; i < stop; ++i) {
                const std::size_t src_row = rows_idx[order[i]];
                const double* src = data.x.data.data() + src_row * d;
                rows.insert(rows.end(), src, src + d);
                labels.push_back(data.labels[src_row]);
            }
            Tensor xb(std::move(rows), {bsz, d});
            if (train_cfg.augment.enabled) {
                xb = augment_batch(xb, train_cfg.augment, rng, &res.augment_skipped);
            }
            EvalResult ev = loss_and_grads(spec, params, xb, labels);
            ++update;
            if (!std::isfinite(ev.loss)) {
                throw std::runtime_error("training diverged at update " + std::to_string(update) +
                                         ": batch loss is not finite");
            }
            try {
                opt.step_all(params.tensors, ev.grads);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("training diverged at update " + std::to_string(update) +
                                         ": " + e.what());
            }
            loss_sum += ev.loss;
            ++batches;
        }
        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(batches);
        if (!held_idx.empty()) {
            const Tensor probs = predict_probs(spec, params, held.x);
            stats.val_accuracy = accuracy(held.labels, argmax_rows(probs));
        } else {
            stats.val_accuracy = std::numeric_limits<double>::quiet_NaN();
        }
        res.history.push_back(stats);
    }
    res.params = std::move(params);
    return res;
}

PredictionSet predict(const ModelSpec& spec, const ModelParams& params, const Dataset& data,
                      int fold) {
    spec.validate();
    check_fold_arg(data, fold);
    PredictionSet out;
    out.fold = fold;
    std::vector<std::size_t> idx;
    if (fold == -1) {
        idx.resize(data.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
    } else {
        idx = fold_indices(data.folds, fold);
    }
    if (idx.empty()) return out;
    const Dataset held = subset(data, idx);
    out.probs = predict_probs(spec, params, held.x);
    out.labels = held.labels;
    return out;
}

}  // namespace gradkit
