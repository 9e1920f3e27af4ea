#pragma once

#include <cstdint>
#include <vector>

#include "gradkit/dataset.hpp"
#include "gradkit/ensemble.hpp"
#include "gradkit/model.hpp"
#include "gradkit/optimizer.hpp"
#include "gradkit/rng.hpp"

namespace gradkit {

struct AugmentConfig {
    bool enabled = false;
    bool reflect = true;    // mirror rows/columns, each with probability 1/2
    double scale_lo = 0.9;  // per-axis resampling factor range
    double scale_hi = 1.1;

    void validate() const;
};

struct TrainConfig {
    std::size_t batch_size = 30;
    std::size_t epochs = 20;
    std::uint64_t seed = 0;  // drives shuffling and augmentation only
    AugmentConfig augment;

    void validate() const;
};

/// Mirror a side x side image in place.
void flip_horizontal(double* img, std::size_t side);
void flip_vertical(double* img, std::size_t side);

/// Resample with per-axis factors about the image center, bilinear, source
/// coordinates clamped to the frame. Factors of exactly 1 reproduce the
/// input bit for bit. dst and src must not alias.
void scale_image(double* dst, const double* src, std::size_t side, double sy, double sx);

/// Applies the configured transforms to every row that is a square image.
/// Rows whose width is not a perfect square pass through unchanged and are
/// counted in *skipped. Draw order per augmented row: horizontal coin,
/// vertical coin (reflect only), then row factor, column factor.
Tensor augment_batch(const Tensor& x, const AugmentConfig& cfg, Rng& rng,
                     std::size_t* skipped = nullptr);

struct EpochStats {
    double train_loss = 0.0;    // mean over the epoch's batches
    double val_accuracy = 0.0;  // NaN when no held-out fold exists
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochStats> history;
    std::size_t augment_skipped = 0;
};

/// Trains on every sample outside `fold` (fold -1 trains on everything).
/// Weights come from spec.seed; train_cfg.seed drives shuffling and
/// augmentation. Per-epoch history tracks mean train loss and accuracy on
/// the held-out fold. Throws std::runtime_error naming the global update
/// index if the loss or an update turns non-finite. epochs == 0 returns the
/// initial parameters.
TrainResult train(const ModelSpec& spec, const Dataset& data, int fold,
                  const OptimConfig& optim_cfg, const TrainConfig& train_cfg);

/// Softmax predictions with labels for the samples of `fold` (fold -1 means
/// the whole dataset). A fold with no samples yields an empty set. Metadata
/// other than the fold id is left for the caller.
PredictionSet predict(const ModelSpec& spec, const ModelParams& params, const Dataset& data,
                      int fold);

}  // namespace gradkit
