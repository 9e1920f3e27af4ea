#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "gradkit/rng.hpp"
#include "gradkit/tensor.hpp"

namespace gradkit {

enum class Activation { relu, tanh };

std::string_view activation_name(Activation a);
Activation activation_from_name(std::string_view name);

/// Fully connected classifier: layer_sizes front to back is input width,
/// hidden widths, class count. {64, 32, 10} is one affine+activation layer
/// followed by an affine readout. At least one hidden layer is required.
/// The seed fixes the weight initialization.
struct ModelSpec {
    std::vector<std::size_t> layer_sizes{64, 32, 10};
    Activation activation = Activation::relu;
    std::uint64_t seed = 0;

    std::size_t input_width() const { return layer_sizes.front(); }
    std::size_t class_count() const { return layer_sizes.back(); }
    void validate() const;
};

/// Parameter tensors in the fixed order W0, b0, W1, b1, ... with Wi of shape
/// {in, out} and bi of shape {out}.
struct ModelParams {
    std::vector<Tensor> tensors;
};

/// Weights drawn uniformly from [-sqrt(6/fan_in), sqrt(6/fan_in)], biases
/// zero. Draw order is W0 row-major, then W1, ... so the result is fully
/// determined by the generator state.
ModelParams init_params(const ModelSpec& spec, Rng& rng);

struct Forward {
    std::vector<Tensor> acts;  // acts[0] is the input batch, then one entry per hidden layer
    Tensor logits;             // {batch, classes}
    Tensor probs;              // row-wise softmax of logits
};

Forward forward(const ModelSpec& spec, const ModelParams& params, const Tensor& x);

/// Row-wise softmax computed against the row's log-sum-exp.
Tensor softmax_rows(const Tensor& logits);

struct EvalResult {
    double loss = 0.0;           // mean cross-entropy over the batch
    Tensor probs;                // {batch, classes}
    std::vector<Tensor> grads;   // same order and shapes as ModelParams::tensors
};

EvalResult loss_and_grads(const ModelSpec& spec, const ModelParams& params, const Tensor& x,
                          const std::vector<int>& labels);

Tensor predict_probs(const ModelSpec& spec, const ModelParams& params, const Tensor& x);

}  // namespace gradkit
